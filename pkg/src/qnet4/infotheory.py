"""Entropies of node-subset marginals and n-partite mutual information.

All logarithms are base 2. Subsets and parts are node labels such as
``"A"`` or ``"AB"``; a composite part is treated atomically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Mapping, Sequence

import numpy as np

from . import qlinalg as ql
from . import tolerances as tol
from .layout import canonical, node_subsets, particles_of
from .netbuild import NetworkState


def entropy_of_spectrum(values: np.ndarray) -> float:
    """-sum p log2 p with the clamping rules of the package.

    Values in (EIGEN_NEGATIVE, EIGEN_ZERO] count as exact zeros; anything
    more negative means the matrix upstream was not a density matrix.
    """
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < tol.EIGEN_NEGATIVE:
        raise ValueError(f"eigenvalue {values.min():.3e} is too negative for a density matrix")
    p = values[values > tol.EIGEN_ZERO]
    return float(-np.sum(p * np.log2(p)))


def entropy_bits(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits."""
    rho = np.asarray(rho)
    tr = np.trace(rho).real
    if abs(tr - 1) > tol.TRACE_ATOL:
        raise ValueError(f"trace {tr} deviates from 1")
    return entropy_of_spectrum(ql.hermitian_spectrum(rho))


def reduced_density(state: NetworkState, subset: str) -> np.ndarray:
    ids = particles_of(state.layout, subset)
    return state.marginal(ids)


def subset_spectrum(state: NetworkState, subset: str) -> np.ndarray:
    return state.spectrum(particles_of(state.layout, subset))


def subset_entropy(state: NetworkState, subset: str) -> float:
    return entropy_of_spectrum(subset_spectrum(state, subset))


def entropy_table(state: NetworkState, subsets: Sequence[str] | None = None) -> dict[str, float]:
    """Entropies (bits) of the requested node subsets, default all 15."""
    subsets = node_subsets(state.layout.nodes) if subsets is None else [canonical(s) for s in subsets]
    return {s: subset_entropy(state, s) for s in subsets}


@dataclass(frozen=True)
class MarginalReport:
    entropies: dict[str, float]
    ranks: dict[str, int]
    global_entropy: float
    global_rank: int

    def to_dict(self) -> dict:
        return {
            "entropies": dict(self.entropies),
            "ranks": dict(self.ranks),
            "global_entropy": self.global_entropy,
            "global_rank": self.global_rank,
        }


def marginal_report(state: NetworkState, rank_tol: float = tol.RANK_RTOL) -> MarginalReport:
    entropies, ranks = {}, {}
    for s in node_subsets(state.layout.nodes):
        spec = subset_spectrum(state, s)
        entropies[s] = entropy_of_spectrum(spec)
        ranks[s] = ql.numerical_rank(spec, rank_tol)
    if state.is_pure:
        # the network-wide state includes the environment purification
        spec = state.spectrum(range(state.layout.n_network))
    else:
        spec = ql.hermitian_spectrum(state.rho)
    return MarginalReport(entropies, ranks, entropy_of_spectrum(spec), ql.numerical_rank(spec, rank_tol))


# ---------------------------------------------------------------------------
# mutual information


@dataclass(frozen=True)
class MutualInfoValue:
    n: int
    value: float
    labels: tuple[str, ...] = field(default=())


def inclusion_exclusion(n: int, entropy_of: Callable[[tuple[int, ...]], float]) -> float:
    """I_n = sum over nonempty index sets K of (-1)^(|K|-1) S(K)."""
    total = 0.0
    for k in range(1, n + 1):
        sign = 1.0 if k % 2 else -1.0
        for c in combinations(range(n), k):
            total += sign * entropy_of(c)
    return total


class _Entropies(Mapping):
    """Lazily evaluated, cached subset entropies of one state."""

    def __init__(self, state: NetworkState):
        self._state = state
        self._cache: dict[str, float] = {}

    def __getitem__(self, key: str) -> float:
        key = canonical(key)
        if key not in self._cache:
            self._cache[key] = subset_entropy(self._state, key)
        return self._cache[key]

    def __iter__(self):
        return iter(node_subsets(self._state.layout.nodes))

    def __len__(self) -> int:
        return len(node_subsets(self._state.layout.nodes))


def entropies(state_or_table) -> Mapping[str, float]:
    if isinstance(state_or_table, _Entropies):
        return state_or_table
    if isinstance(state_or_table, Mapping):
        table = state_or_table
        return {canonical(k): v for k, v in table.items()}
    return _Entropies(state_or_table)


def _check_parts(parts: Sequence[str]) -> list[str]:
    parts = [canonical(p) for p in parts]
    seen: set[str] = set()
    for p in parts:
        if seen & set(p):
            raise ValueError(f"parts {parts} overlap")
        seen |= set(p)
    return parts


def _union(*parts: str) -> str:
    return canonical("".join(parts))


def mutual_information(state, parts: Sequence[str]) -> MutualInfoValue:
    """n-partite mutual information of disjoint node subsets.

    ``state`` is a :class:`NetworkState` or a mapping from subset labels to
    entropies (as returned by :func:`entropy_table`).
    """
    parts = _check_parts(parts)
    if not parts:
        raise ValueError("need at least one part")
    S = entropies(state)
    value = inclusion_exclusion(len(parts), lambda idx: S[_union(*(parts[i] for i in idx))])
    return MutualInfoValue(len(parts), value, tuple(parts))


def i2(state, x: str, y: str) -> float:
    _check_parts([x, y])
    S = entropies(state)
    return S[x] + S[y] - S[_union(x, y)]


def i3(state, x: str, y: str, z: str) -> float:
    """I3(X:Y:Z) = I2(X:Y) + I2(X:Z) - I2(X:YZ)."""
    S = entropies(state)
    return i2(S, x, y) + i2(S, x, z) - i2(S, x, _union(y, z))


def i4_via_recursion(state, t: str, x: str, y: str, z: str) -> float:
    """I4(T:X:Y:Z) = I3(T:X:Y) + I3(T:X:Z) - I3(T:X:YZ), each I3 built from I2."""
    _check_parts([t, x, y, z])
    S = entropies(state)
    return i3(S, t, x, y) + i3(S, t, x, z) - i3(S, t, x, _union(y, z))


def i4_in_terms_of_i2(state, a: str = "A", b: str = "B", c: str = "C", d: str = "D") -> float:
    """I4 rewritten with two-party informations against the last part."""
    _check_parts([a, b, c, d])
    S = entropies(state)
    return (
        i2(S, _union(a, b, c), d)
        + i2(S, a, d)
        + i2(S, b, d)
        + i2(S, c, d)
        - i2(S, _union(a, b), d)
        - i2(S, _union(a, c), d)
        - i2(S, _union(b, c), d)
    )


def i4_x1_minus_x2(state) -> float:
    """I4(A:B:C:D) written out as x1 - x2 over the fifteen subset entropies."""
    S = entropies(state)
    x1 = sum(S[s] for s in ("A", "B", "C", "D", "ABC", "ABD", "BCD", "ACD"))
    x2 = sum(S[s] for s in ("AB", "AC", "AD", "BC", "BD", "CD", "ABCD"))
    return x1 - x2


# ---------------------------------------------------------------------------
# structural oracle


def structural_entropy(state: NetworkState, subset: str) -> float:
    """Entropy of a node subset predicted from the source states alone.

    For a network state each source contributes the entropy of its own
    marginal on the particles that land inside the subset; the node
    unitaries drop out. The global density matrix is never touched.
    """
    if state.mixture is not None:
        raise ValueError("structural entropy does not apply to classical mixtures")
    if state.sources is None or state.topology is None:
        raise ValueError("state carries no source provenance")
    members = canonical(subset)
    layout = state.layout
    total = 0.0
    for label, src in zip(layout.sources, state.sources):
        ids = layout.source_particles(label)
        inside = [k for k, pid in enumerate(ids) if layout.particles[pid].node in members]
        if not inside:
            continue
        total += entropy_bits(src.marginal(inside))
    return total
