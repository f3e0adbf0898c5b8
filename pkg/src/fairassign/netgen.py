"""Random instance generators: bipartite cost graphs and transport networks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.stats import truncnorm

from .distributions import (
    DEFAULT_SAMPLES,
    SampleMatrix,
    TruncatedGaussian,
    distribution_from_dict,
    empirical_discrete,
    make_truncated_gaussian,
    uniform_tensor,
)
from .exceptions import DisconnectedError, InvalidParameterError
from .problem import ProblemInstance


def _check_range(name, rng_, positive=False):
    lo, hi = map(float, rng_)
    if not lo <= hi:
        raise InvalidParameterError(f"{name} must satisfy lo <= hi, got {rng_}")
    if positive and lo <= 0:
        raise InvalidParameterError(f"{name} must be positive, got {rng_}")
    return lo, hi


def random_bipartite(N: int, M: int, mean_range=(15.0, 20.0), std_range=(5.0, 10.0),
                     truncation: float = 5.0, seed: int = 0,
                     n_deploy: int | None = None) -> ProblemInstance:
    """Fully connected instance with independent truncated-Gaussian edges.

    Each edge draws its mean and standard deviation uniformly from the
    given ranges; every law is truncated below at ``truncation``.
    """
    if N < M or M < 1:
        raise InvalidParameterError(f"need N >= M >= 1, got N={N}, M={M}")
    mlo, mhi = _check_range("mean_range", mean_range)
    slo, shi = _check_range("std_range", std_range, positive=True)
    if truncation < 0:
        raise InvalidParameterError("truncation must be >= 0")
    rng = np.random.default_rng(seed)
    means = rng.uniform(mlo, mhi, size=(N, M))
    stds = rng.uniform(slo, shi, size=(N, M))
    edges = [[make_truncated_gaussian(means[i, j], stds[i, j], truncation) for j in range(M)]
             for i in range(N)]
    return ProblemInstance(edges, M if n_deploy is None else n_deploy)


@dataclass(frozen=True)
class TransportNetwork:
    """Undirected road graph with random travel times per edge."""

    nodes: int
    edges: tuple  # (u, v, distribution)
    agent_locations: tuple
    task_locations: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v), d) for u, v, d in self.edges))
        object.__setattr__(self, "agent_locations", tuple(int(a) for a in self.agent_locations))
        object.__setattr__(self, "task_locations", tuple(int(t) for t in self.task_locations))
        for name, locs in (("agent", self.agent_locations), ("task", self.task_locations)):
            if any(not 0 <= x < self.nodes for x in locs):
                raise InvalidParameterError(f"{name} location outside 0..{self.nodes - 1}")
            if len(set(locs)) != len(locs):
                raise InvalidParameterError(f"two {name}s share a node")
        if not self.task_locations or len(self.agent_locations) < len(self.task_locations):
            raise InvalidParameterError("need at least as many agents as tasks, and one task")
        for u, v, _ in self.edges:
            if u == v or not (0 <= u < self.nodes and 0 <= v < self.nodes):
                raise InvalidParameterError(f"bad edge ({u}, {v})")
        if len({frozenset((u, v)) for u, v, _ in self.edges}) != len(self.edges):
            raise InvalidParameterError("duplicate edge")
        if not self.is_connected():
            raise DisconnectedError("network is not connected")

    @property
    def N(self) -> int:
        return len(self.agent_locations)

    @property
    def M(self) -> int:
        return len(self.task_locations)

    def _adjacency(self, weights) -> coo_matrix:
        u = [e[0] for e in self.edges]
        v = [e[1] for e in self.edges]
        return coo_matrix((weights, (u, v)), shape=(self.nodes, self.nodes)).tocsr()

    def is_connected(self) -> bool:
        if self.nodes == 1:
            return True
        n, _ = connected_components(self._adjacency(np.ones(len(self.edges))), directed=False)
        return n == 1

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": [[u, v, d.to_dict()] for u, v, d in self.edges],
            "agents": list(self.agent_locations),
            "tasks": list(self.task_locations),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransportNetwork":
        try:
            edges = [(u, v, distribution_from_dict(dist)) for u, v, dist in d["edges"]]
            return cls(int(d["nodes"]), edges, d["agents"], d["tasks"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidParameterError):
                raise
            raise InvalidParameterError(f"malformed network: {exc}") from exc


def random_transport_network(nodes: int = 50, N: int = 32, M: int = 16,
                             edge_mean_range=(10.0, 20.0), edge_std_range=(5.0, 10.0),
                             extra_edge_density: float = 0.2,
                             seed: int = 0) -> TransportNetwork:
    """Connected random road graph with agents and tasks on random nodes.

    The graph is a random recursive spanning tree over a shuffled node order;
    every other node pair is then joined independently with probability
    ``extra_edge_density``. Edge travel times are Gaussians truncated at
    zero. Agents occupy distinct nodes, as do tasks; an agent and a task may
    share a node.
    """
    if nodes < max(N, M) or M < 1 or N < M:
        raise InvalidParameterError(f"need nodes >= N >= M >= 1, got {nodes}, {N}, {M}")
    mlo, mhi = _check_range("edge_mean_range", edge_mean_range)
    slo, shi = _check_range("edge_std_range", edge_std_range, positive=True)
    if not 0 <= extra_edge_density <= 1:
        raise InvalidParameterError("extra_edge_density must lie in [0, 1]")
    rng = np.random.default_rng(seed)

    order = rng.permutation(nodes)
    links = []
    for k in range(1, nodes):
        parent = order[rng.integers(k)]
        links.append((int(min(order[k], parent)), int(max(order[k], parent))))
    tree = set(links)
    iu, iv = np.triu_indices(nodes, k=1)
    coin = rng.random(len(iu)) < extra_edge_density
    links.extend((int(u), int(v)) for u, v, c in zip(iu, iv, coin) if c and (u, v) not in tree)

    means = rng.uniform(mlo, mhi, size=len(links))
    stds = rng.uniform(slo, shi, size=len(links))
    edges = [(u, v, make_truncated_gaussian(mu, sd, 0.0))
             for (u, v), mu, sd in zip(links, means, stds)]
    agents = rng.choice(nodes, size=N, replace=False)
    tasks = rng.choice(nodes, size=M, replace=False)
    return TransportNetwork(nodes, edges, agents, tasks)


def sample_edge_times(net: TransportNetwork, S: int, seed: int) -> np.ndarray:
    """``(S, E)`` travel-time draws, one column per network edge."""
    u = uniform_tensor(np.random.default_rng(seed), (S, len(net.edges)))
    out = np.empty_like(u)
    tg = [k for k, e in enumerate(net.edges) if isinstance(e[2], TruncatedGaussian)]
    if tg:
        d = [net.edges[k][2] for k in tg]
        out[:, tg] = truncnorm.ppf(u[:, tg], [x._a for x in d], np.inf,
                                   loc=[x.mean for x in d], scale=[x.std for x in d])
    for k, (_, _, dist) in enumerate(net.edges):
        if not isinstance(dist, TruncatedGaussian):
            out[:, k] = dist.ppf(u[:, k])
    return out


def shortest_path_samples(net: TransportNetwork, S: int = DEFAULT_SAMPLES,
                          seed: int = 0) -> SampleMatrix:
    """Per-scenario shortest travel time from every agent to every task."""
    times = sample_edge_times(net, S, seed)
    agents = np.array(net.agent_locations)
    tasks = np.array(net.task_locations)
    out = np.empty((S, net.N, net.M))
    for s in range(S):
        dist = dijkstra(net._adjacency(times[s]), directed=False, indices=agents)
        out[s] = dist[:, tasks]
    if not np.isfinite(out).all():
        raise DisconnectedError("some task is unreachable from some agent")
    return SampleMatrix(out, seed)


def network_to_instance(net: TransportNetwork, S: int = DEFAULT_SAMPLES, seed: int = 0,
                        n_deploy: int | None = None) -> tuple:
    """Scenario tensor of shortest-path times plus an instance holding the
    empirical marginal law of every agent-task travel time.

    The returned ``SampleMatrix`` keeps the correlation induced by shared
    road edges; the per-edge discrete laws in the instance do not, so solve
    against the matrix.
    """
    matrix = shortest_path_samples(net, S, seed)
    edges = [[empirical_discrete(matrix.samples[:, i, j]) for j in range(net.M)]
             for i in range(net.N)]
    return ProblemInstance(edges, net.M if n_deploy is None else n_deploy), matrix
