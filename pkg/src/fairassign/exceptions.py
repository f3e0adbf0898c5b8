"""Exception hierarchy shared by all solver modules."""


class FairAssignError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(FairAssignError, ValueError):
    pass


class IncompleteInstanceError(FairAssignError, ValueError):
    """An agent-task edge has no cost distribution."""


class UncoveredTaskError(FairAssignError):
    """A task has no agent in the initial plus redundant assignment."""


class InvalidAugmentationError(FairAssignError, ValueError):
    """Adding a pair would place one agent on two tasks."""


class InfeasibleInstanceError(FairAssignError):
    pass


class TooLargeError(FairAssignError):
    """An exact enumeration would exceed its configured cap."""


class DisconnectedError(FairAssignError):
    pass
