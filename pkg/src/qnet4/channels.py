"""Local quantum channels acting on whole nodes, in Kraus form."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Mapping, Sequence

import numpy as np

from . import qlinalg as ql
from . import tolerances as tol
from .layout import NODES, adjacent
from .netbuild import NetworkState, haar_unitary


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...] = field(repr=False)
    name: str = "custom"

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise ValueError("Kraus operators must all be square with the same size")
        completeness = sum(k.conj().T @ k for k in ops)
        err = np.max(np.abs(completeness - np.eye(dim)))
        if err > tol.KRAUS_COMPLETENESS:
            raise ValueError(f"Kraus operators violate completeness by {err:.3e}")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.operators)

    def tensor(self, other: "KrausChannel") -> "KrausChannel":
        ops = tuple(np.kron(a, b) for a in self.operators for b in other.operators)
        return KrausChannel(ops, f"{self.name}*{other.name}")


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),), "identity")


def unitary_channel(u: np.ndarray) -> KrausChannel:
    return KrausChannel((np.asarray(u),), "unitary")


def product_channel(channels: Sequence[KrausChannel]) -> KrausChannel:
    out = channels[0]
    for ch in channels[1:]:
        out = out.tensor(ch)
    return out


def _weyl(dim: int) -> list[np.ndarray]:
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) for a in range(dim) for b in range(dim)]


def preset_depolarizing(dim: int, p: float) -> KrausChannel:
    """rho -> (1 - p) rho + p I/dim, via the dim^2 Weyl operators."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    weyl = _weyl(dim)
    ops = [np.sqrt(1 - p + p / dim**2) * weyl[0]]
    ops += [np.sqrt(p / dim**2) * w for w in weyl[1:]]
    return KrausChannel(tuple(ops), f"depolarizing:{p}")


def preset_amplitude_damping(gamma: float) -> KrausChannel:
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel((k0, k1), f"amp_damp:{gamma}")


def sample_channel(dim: int, kraus_count: int, rng: np.random.Generator) -> KrausChannel:
    """Random channel from the column blocks of a Haar isometry (Stinespring)."""
    if kraus_count < 1:
        raise ValueError("kraus_count must be >= 1")
    v = haar_unitary(dim * kraus_count, rng)[:, :dim]
    ops = tuple(v[i * dim : (i + 1) * dim, :] for i in range(kraus_count))
    return KrausChannel(ops, f"random:{kraus_count}")


def parse_channel(text: str, particle_dims: Sequence[int], rng: np.random.Generator | None = None) -> KrausChannel:
    """Build a node channel from ``depolarizing:p``, ``amp_damp:gamma`` or ``random:k``.

    Amplitude damping is a qubit channel and is applied to every particle of
    the node; the other two act on the full node space.
    """
    kind, _, arg = text.partition(":")
    dim = prod(particle_dims)
    if kind == "identity":
        return identity_channel(dim)
    if kind == "depolarizing":
        return preset_depolarizing(dim, float(arg))
    if kind == "amp_damp":
        if any(d != 2 for d in particle_dims):
            raise ValueError("amplitude damping needs qubit particles")
        return product_channel([preset_amplitude_damping(float(arg))] * len(particle_dims))
    if kind == "random":
        if rng is None:
            raise ValueError("random channels need a generator")
        return sample_channel(dim, int(arg or 2), rng)
    raise ValueError(f"unknown channel preset {text!r}")


@dataclass(frozen=True)
class ChannelPlacement:
    """Channels assigned to nodes; nodes without an entry get the identity."""

    assignments: Mapping[str, KrausChannel]

    def __post_init__(self) -> None:
        for node in self.assignments:
            if node not in NODES:
                raise ValueError(f"channel key {node!r} is not a single node")


def apply(placement: ChannelPlacement, state: NetworkState) -> NetworkState:
    """Apply the placement; the result is a density matrix on the network particles."""
    layout = state.network_layout
    rho = state.density()
    n = layout.n_network
    t = rho.reshape(layout.dims * 2)
    for node, ch in placement.assignments.items():
        ids = layout.node_particles(node)
        if ch.dim != layout.node_dim(node):
            raise ValueError(f"channel on node {node} has dim {ch.dim}, node has {layout.node_dim(node)}")
        cols = [n + i for i in ids]
        acc = np.zeros_like(t)
        for k in ch.operators:
            acc += ql.apply_on_axes(ql.apply_on_axes(t, k, ids), k, cols, conj=True)
        t = acc
    dim = rho.shape[0]
    out = t.reshape(dim, dim)
    out = (out + out.conj().T) / 2
    return NetworkState(layout, rho=out)


def classify_pair(nodes: Sequence[str]) -> str:
    """'adjacent' if the two quadrangle nodes share a source, else 'non_adjacent'."""
    a, b = nodes
    if a == b or a not in NODES or b not in NODES:
        raise ValueError(f"need two distinct nodes, got {nodes}")
    return "adjacent" if adjacent("iqn", a, b) else "non_adjacent"
