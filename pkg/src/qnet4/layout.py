"""Particles, nodes, sources and environment ancillas.

Network particles are ordered source by source (so the product of source
states is a plain Kronecker product), and inside a source by node label.
Environment particles used for purifications always come last.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import prod
from typing import Iterable, Mapping, Sequence

NODES = ("A", "B", "C", "D")
ENV = "env"
TOPOLOGIES = ("iqn", "itcn1", "itcn2")

# source label -> nodes it feeds, in source order
INCIDENCE: dict[str, tuple[tuple[str, str], ...]] = {
    "iqn": (("alpha", "AD"), ("beta", "AB"), ("gamma", "BC"), ("delta", "CD")),
    "itcn1": (
        ("alpha", "AB"),
        ("beta", "BD"),
        ("gamma", "AD"),
        ("delta", "AC"),
        ("theta", "CD"),
        ("tau", "BC"),
    ),
    "itcn2": (("alpha", "ABD"), ("beta", "ABC"), ("gamma", "ACD"), ("delta", "BCD")),
}


class UnknownTopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Particle:
    id: int
    dim: int
    source: str
    node: str

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"particle {self.id} has dimension {self.dim} < 2")
        if (self.node == ENV) != (self.source == ENV):
            raise ValueError(f"particle {self.id}: env particles must have node and source 'env'")

    @property
    def is_env(self) -> bool:
        return self.node == ENV


@dataclass(frozen=True)
class SystemLayout:
    particles: tuple[Particle, ...]
    topology: str | None = None

    def __post_init__(self) -> None:
        for i, p in enumerate(self.particles):
            if p.id != i:
                raise ValueError("particle ids must be 0..n-1 in order")
        seen_env = False
        for p in self.particles:
            if p.is_env:
                seen_env = True
            elif seen_env:
                raise ValueError("environment particles must follow all network particles")
            elif p.node not in NODES:
                raise ValueError(f"unknown node label {p.node!r}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self.particles)

    @property
    def network(self) -> tuple[Particle, ...]:
        return tuple(p for p in self.particles if not p.is_env)

    @property
    def network_dims(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self.network)

    @property
    def n_network(self) -> int:
        return len(self.network)

    @property
    def nodes(self) -> tuple[str, ...]:
        present = {p.node for p in self.network}
        return tuple(n for n in NODES if n in present)

    @property
    def sources(self) -> tuple[str, ...]:
        out: list[str] = []
        for p in self.network:
            if p.source not in out:
                out.append(p.source)
        return tuple(out)

    def node_particles(self, node: str) -> tuple[int, ...]:
        return tuple(p.id for p in self.network if p.node == node)

    def source_particles(self, source: str) -> tuple[int, ...]:
        return tuple(p.id for p in self.network if p.source == source)

    def node_dim(self, node: str) -> int:
        return prod(self.particles[i].dim for i in self.node_particles(node))

    def without_env(self) -> "SystemLayout":
        return SystemLayout(self.network, self.topology)

    def with_env(self, env_dims: Iterable[int]) -> "SystemLayout":
        base = list(self.network)
        for d in env_dims:
            base.append(Particle(len(base), int(d), ENV, ENV))
        return SystemLayout(tuple(base), self.topology)


def canonical(subset: str | Iterable[str]) -> str:
    """Canonical node-subset label, e.g. ``"CA"`` -> ``"AC"``."""
    members = set(subset)
    if not members:
        raise ValueError("node subset must be nonempty")
    bad = members - set(NODES)
    if bad:
        raise ValueError(f"unknown nodes {sorted(bad)}")
    return "".join(n for n in NODES if n in members)


def incidence(topology: str, d: int = 2) -> SystemLayout:
    """Layout of network particles for one of the three four-node topologies."""
    if topology not in INCIDENCE:
        raise UnknownTopologyError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")
    particles = []
    for source, nodes in INCIDENCE[topology]:
        for node in nodes:
            particles.append(Particle(len(particles), d, source, node))
    return SystemLayout(tuple(particles), topology)


def adhoc(node_dims: Mapping[str, Sequence[int]]) -> SystemLayout:
    """Layout for arbitrary states: each node holds particles of the given dims.

    Every particle gets its own pseudo-source label, so no source structure
    is implied.
    """
    particles = []
    for node in NODES:
        for d in node_dims.get(node, ()):
            particles.append(Particle(len(particles), int(d), f"{node}{len(particles)}", node))
    return SystemLayout(tuple(particles), None)


def particles_of(layout: SystemLayout, subset: str | Iterable[str]) -> tuple[int, ...]:
    members = canonical(subset)
    return tuple(p.id for p in layout.network if p.node in members)


def nonempty_subsets(n: int) -> list[tuple[int, ...]]:
    """All nonempty subsets of ``range(n)``, by cardinality then lexicographic."""
    if not 1 <= n <= 8:
        raise ValueError("n must be in [1, 8]")
    return [c for k in range(1, n + 1) for c in combinations(range(n), k)]


def node_subsets(nodes: Sequence[str] = NODES) -> list[str]:
    return ["".join(nodes[i] for i in c) for c in nonempty_subsets(len(nodes))]


def adjacent(topology: str, a: str, b: str) -> bool:
    """True when some source of the topology feeds both nodes."""
    return any(a in nodes and b in nodes for _, nodes in INCIDENCE[topology])


def bipartitions(nodes: Sequence[str] = NODES) -> list[tuple[str, str]]:
    """The 2^(n-1) - 1 unordered bipartitions, first side containing nodes[0]."""
    out = []
    first, rest = nodes[0], nodes[1:]
    for k in range(0, len(rest) + 1):
        for c in combinations(rest, k):
            side = canonical((first,) + c)
            other = "".join(n for n in nodes if n not in side)
            if other:
                out.append((side, other))
    return out
