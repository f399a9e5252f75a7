"""Source sampling and assembly of global network states."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations
from math import prod
from typing import Mapping, Sequence

import numpy as np

from . import qlinalg as ql
from . import tolerances as tol
from .layout import INCIDENCE, NODES, SystemLayout, incidence


class InfeasibleSourceError(ValueError):
    """The requested combination of ranks cannot be realized by any state."""


@dataclass(frozen=True)
class SourceSpec:
    """Target ranks for a 2- or 3-party source.

    ``family="ghz"`` asks for an equal-weight generalized GHZ (or, for two
    parties, maximally entangled) state under random local isometries; its
    two-party marginals are separable. ``family="generic"`` draws a Haar
    random purification inside the rank-restricted support.
    """

    arity: int
    d: int = 2
    kind: str = "pure"
    rank: int = 1
    marginal_ranks: tuple[int, ...] = ()
    family: str = "generic"

    def __post_init__(self) -> None:
        if self.arity not in (2, 3):
            raise ValueError("arity must be 2 or 3")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.kind not in ("pure", "mixed"):
            raise ValueError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")
        if self.family not in ("generic", "ghz"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.kind == "pure" and self.rank != 1:
            raise ValueError("a pure source has rank 1")
        if self.kind == "mixed" and self.rank < 2:
            raise ValueError("a mixed source has rank >= 2")
        if not 1 <= self.rank <= self.d**self.arity:
            raise ValueError(f"rank {self.rank} outside [1, {self.d ** self.arity}]")
        if not self.marginal_ranks:
            object.__setattr__(self, "marginal_ranks", (self.d,) * self.arity)
        object.__setattr__(self, "marginal_ranks", tuple(int(r) for r in self.marginal_ranks))
        if len(self.marginal_ranks) != self.arity:
            raise ValueError("need one marginal rank per party")
        if any(not 1 <= r <= self.d for r in self.marginal_ranks):
            raise ValueError(f"marginal ranks {self.marginal_ranks} outside [1, {self.d}]")

    def check_feasible(self) -> None:
        r = self.marginal_ranks
        if self.family == "ghz":
            if self.kind != "pure" or len(set(r)) != 1:
                raise InfeasibleSourceError("GHZ-class sources are pure with equal marginal ranks")
            return
        # pure state on parties + environment of dimension `rank`
        core = r + ((self.rank,) if self.rank > 1 else ())
        total = prod(core)
        for x in core:
            if x * x > total:
                raise InfeasibleSourceError(f"marginal ranks {r} with global rank {self.rank} are not realizable")

    def marginal_rank(self, parties: Sequence[int]) -> int:
        """Generic rank of the reduced state on ``parties`` (indices into the source)."""
        inside = sorted(set(parties))
        if not inside:
            return 1
        if len(inside) == self.arity:
            return self.rank
        if self.family == "ghz":
            return self.marginal_ranks[0]
        outside = [i for i in range(self.arity) if i not in inside]
        return min(
            prod(self.marginal_ranks[i] for i in inside),
            prod(self.marginal_ranks[i] for i in outside) * self.rank,
        )


@dataclass(frozen=True)
class Source:
    """A sampled source: density on its particles plus a purification.

    The purification lives on the source particles followed by one
    environment particle of dimension ``env_dim`` (absent when pure).
    """

    density: np.ndarray = field(repr=False)
    purification: np.ndarray = field(repr=False)
    arity: int
    d: int
    env_dim: int = 1
    spec: SourceSpec | None = None

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * self.arity

    @property
    def purification_dims(self) -> tuple[int, ...]:
        return self.dims + ((self.env_dim,) if self.env_dim > 1 else ())

    def marginal(self, parties: Sequence[int]) -> np.ndarray:
        return ql.partial_trace(self.density, self.dims, parties)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR factorization of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def _haar_isometry(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(d, rng)[:, :k]


def _random_unit_vectors(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def source_from_vector(psi: np.ndarray, arity: int, d: int, spec: SourceSpec | None = None) -> Source:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != d**arity:
        raise ValueError(f"expected {d ** arity} amplitudes, got {psi.size}")
    psi = psi / np.linalg.norm(psi)
    return Source(np.outer(psi, psi.conj()), psi, arity, d, 1, spec)


def source_from_density(rho: np.ndarray, arity: int, d: int, spec: SourceSpec | None = None) -> Source:
    """Wrap a density matrix, purifying it on an environment of dimension rank."""
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh(rho)
    keep = w > tol.RANK_RTOL * w.max()
    w, v = w[keep], v[:, keep]
    if w.size == 1:
        return source_from_vector(v[:, 0], arity, d, spec)
    # |psi> = sum_i sqrt(w_i) |v_i>|i>
    purification = (v * np.sqrt(w)).reshape(-1)
    return Source(rho, purification, arity, d, int(w.size), spec)


def bell_source(d: int = 2) -> Source:
    """Maximally entangled two-party state sum_i |ii>/sqrt(d)."""
    psi = np.zeros(d * d, dtype=complex)
    psi[[i * d + i for i in range(d)]] = 1 / np.sqrt(d)
    return source_from_vector(psi, 2, d)


def ghz_source(d: int = 2, arity: int = 3) -> Source:
    psi = np.zeros(d**arity, dtype=complex)
    psi[[sum(i * d**k for k in range(arity)) for i in range(d)]] = 1 / np.sqrt(d)
    return source_from_vector(psi, arity, d)


def product_source(d: int = 2, arity: int = 2) -> Source:
    psi = np.zeros(d**arity, dtype=complex)
    psi[0] = 1.0
    return source_from_vector(psi, arity, d)


SOURCE_MIN_RATIO = {2: 0.1, 3: 0.03}


def _party_subsets(arity: int) -> list[tuple[int, ...]]:
    return [c for k in range(1, arity + 1) for c in combinations(range(arity), k)]


def _well_conditioned(purification: np.ndarray, dims: Sequence[int], spec: SourceSpec, min_ratio: float) -> bool:
    for parties in _party_subsets(spec.arity):
        s = ql.pure_marginal_spectrum(purification, dims, parties)
        target = spec.marginal_rank(parties)
        if ql.numerical_rank(s) != target:
            return False
        if s[target - 1] < min_ratio * s[0]:
            return False
    return True


def sample_source(
    spec: SourceSpec,
    rng: np.random.Generator,
    min_ratio: float | None = None,
    max_tries: int = 2000,
) -> Source:
    """Draw a source state with the requested rank structure.

    Draws are rejected until every party-subset marginal has exactly the
    target numerical rank and its smallest nonzero eigenvalue is at least
    ``min_ratio`` times the largest. Bipartite pure sources therefore have
    their smallest Schmidt coefficient bounded away from zero.

    The default ratio is 0.1 for two-party and 0.03 for three-party sources.
    Network marginal spectra are products of source spectra, so the worst
    ratio in a network is at least 0.1^6 (six edges) or 0.03^4 (four
    faces), both far above the relative rank threshold. Three parties need
    the lower value: square reshapings such as the 2x2 | 2xenv split of a
    rank-2 qubit source are rarely better conditioned than a few percent.
    """
    spec.check_feasible()
    if min_ratio is None:
        min_ratio = SOURCE_MIN_RATIO[spec.arity]
    d, arity, r = spec.d, spec.arity, spec.marginal_ranks
    env = spec.rank if spec.rank > 1 else 1
    dims = (d,) * arity + ((env,) if env > 1 else ())
    for _ in range(max_tries):
        if spec.family == "ghz":
            k = r[0]
            core = np.zeros((k,) * arity, dtype=complex)
            for i in range(k):
                core[(i,) * arity] = 1 / np.sqrt(k)
        else:
            support = prod(r)
            if env == 1:
                core = _random_unit_vectors(1, support, rng)[0].reshape(r)
            else:
                # uniform weights perturbed by a Dirichlet draw, on orthonormal
                # random eigenvectors inside the support
                weights = 0.5 / env + 0.5 * rng.dirichlet(np.ones(env))
                phis = haar_unitary(support, rng)[:, :env] * np.sqrt(weights)
                core = phis.reshape(r + (env,))
        t = core
        for axis in range(arity):
            iso = _haar_isometry(d, r[axis], rng)
            t = np.moveaxis(np.tensordot(iso, t, axes=([1], [axis])), 0, axis)
        purification = t.reshape(-1)
        purification = purification / np.linalg.norm(purification)
        if _well_conditioned(purification, dims, spec, min_ratio):
            density = ql.reduced_from_pure(purification, dims, range(arity))
            return Source(density, purification, arity, d, env, spec)
    raise InfeasibleSourceError(f"could not sample a well-conditioned source for {spec} in {max_tries} tries")


@dataclass(frozen=True)
class NetworkState:
    """Global state of a network.

    Exactly one of ``psi`` (pure vector over network and environment
    particles of ``layout``) or ``rho`` (density over the network particles)
    is set. The remaining fields record how the state was made.
    """

    layout: SystemLayout
    psi: np.ndarray | None = field(default=None, repr=False)
    rho: np.ndarray | None = field(default=None, repr=False)
    sources: tuple[Source, ...] | None = field(default=None, repr=False)
    unitaries: Mapping[str, np.ndarray] | None = field(default=None, repr=False)
    mixture: tuple[tuple[float, "NetworkState"], ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if (self.psi is None) == (self.rho is None):
            raise ValueError("exactly one of psi or rho must be given")
        if self.psi is not None:
            if self.psi.size != prod(self.layout.dims):
                raise ValueError("vector length does not match layout")
            if abs(np.vdot(self.psi, self.psi).real - 1) > tol.HERMITIAN_ATOL:
                raise ValueError("pure state is not normalized")
        else:
            if any(p.is_env for p in self.layout.particles):
                raise ValueError("density representation carries no environment particles")
            n = prod(self.layout.dims)
            if self.rho.shape != (n, n):
                raise ValueError("density shape does not match layout")
            if abs(np.trace(self.rho).real - 1) > tol.HERMITIAN_ATOL:
                raise ValueError("density matrix does not have unit trace")
            if not ql.is_hermitian(self.rho, 1e-9):
                raise ValueError("density matrix is not Hermitian")
            if n <= 1024 and np.linalg.eigvalsh(self.rho)[0] < tol.EIGEN_NEGATIVE:
                raise ValueError("density matrix is not positive semidefinite")

    @classmethod
    def from_vector(cls, psi: np.ndarray, layout: SystemLayout) -> "NetworkState":
        return cls(layout, psi=np.asarray(psi, dtype=complex).ravel())

    @classmethod
    def from_density(cls, rho: np.ndarray, layout: SystemLayout) -> "NetworkState":
        return cls(layout, rho=np.asarray(rho, dtype=complex))

    @property
    def is_pure(self) -> bool:
        return self.psi is not None

    @property
    def topology(self) -> str | None:
        return self.layout.topology

    @property
    def network_layout(self) -> SystemLayout:
        return self.layout.without_env()

    def density(self) -> np.ndarray:
        """Density matrix on the network particles (environment traced out)."""
        if self.rho is not None:
            return self.rho
        return ql.reduced_from_pure(self.psi, self.layout.dims, range(self.layout.n_network))

    def marginal(self, particle_ids: Sequence[int]) -> np.ndarray:
        if self.psi is not None:
            return ql.reduced_from_pure(self.psi, self.layout.dims, particle_ids)
        return ql.partial_trace(self.rho, self.layout.dims, particle_ids)

    def spectrum(self, particle_ids: Sequence[int]) -> np.ndarray:
        """Descending spectrum of the marginal on the given network particles."""
        if self.psi is not None:
            return ql.pure_marginal_spectrum(self.psi, self.layout.dims, particle_ids)
        return ql.hermitian_spectrum(self.marginal(particle_ids))


def _as_source_list(topology: str, sources) -> list:
    labels = [s for s, _ in INCIDENCE[topology]]
    if isinstance(sources, Mapping):
        missing = set(labels) - set(sources)
        if missing:
            raise ValueError(f"missing sources {sorted(missing)}")
        return [sources[s] for s in labels]
    sources = list(sources)
    if len(sources) != len(labels):
        raise ValueError(f"{topology} needs {len(labels)} sources, got {len(sources)}")
    return sources


def _check_unitaries(layout: SystemLayout, unitaries: Mapping[str, np.ndarray] | None) -> dict[str, np.ndarray]:
    out = {}
    for node, u in (unitaries or {}).items():
        if node not in NODES:
            raise ValueError(f"unitary key {node!r} is not a single node; operators may not straddle nodes")
        u = np.asarray(u, dtype=complex)
        k = layout.node_dim(node)
        if u.shape != (k, k):
            raise ValueError(f"unitary for node {node} must be {k}x{k}, got {u.shape}")
        if np.max(np.abs(u.conj().T @ u - np.eye(k))) > tol.UNITARITY * 10:
            raise ValueError(f"matrix for node {node} is not unitary")
        out[node] = u
    return out


def build_network(
    topology: str,
    sources: Sequence | Mapping,
    unitaries: Mapping[str, np.ndarray] | None = None,
) -> NetworkState:
    """Apply node unitaries to the product of source states.

    ``sources`` lists :class:`Source` objects (or bare density matrices) in
    the topology's source order. With only :class:`Source` objects the
    result is a pure vector over network particles plus one environment
    particle per mixed source; otherwise a dense density matrix.
    """
    items = _as_source_list(topology, sources)
    arities = [len(nodes) for _, nodes in INCIDENCE[topology]]
    d = None
    for item, arity in zip(items, arities):
        if isinstance(item, Source):
            if item.arity != arity:
                raise ValueError(f"source arity {item.arity} does not fit {topology} (needs {arity})")
            sd = item.d
        else:
            m = np.asarray(item)
            sd = round(m.shape[0] ** (1 / arity))
            if sd**arity != m.shape[0]:
                raise ValueError(f"density of size {m.shape[0]} is not a {arity}-party state")
        if d is None:
            d = sd
        elif sd != d:
            raise ValueError("all sources must share one local dimension")
    layout = incidence(topology, d)
    us = _check_unitaries(layout, unitaries)

    if all(isinstance(s, Source) for s in items):
        env_dims = [s.env_dim for s in items if s.env_dim > 1]
        full = layout.with_env(env_dims)
        ql.check_vector_dim(prod(full.dims))
        psi = ql.kron_vectors(s.purification for s in items)
        # current axis order: per source, its particles then its env
        axes_net, axes_env, pos = [], [], 0
        for s in items:
            axes_net.extend(range(pos, pos + s.arity))
            pos += s.arity
            if s.env_dim > 1:
                axes_env.append(pos)
                pos += 1
        current_dims = [dim for s in items for dim in s.purification_dims]
        t = psi.reshape(current_dims).transpose(axes_net + axes_env)
        for node, u in us.items():
            t = ql.apply_on_axes(t, u, layout.node_particles(node))
        return NetworkState(full, psi=t.reshape(-1), sources=tuple(items), unitaries=us)

    dens = [s.density if isinstance(s, Source) else np.asarray(s, dtype=complex) for s in items]
    n = prod(layout.dims)
    ql.check_matrix_dim(n)
    rho = ql.tensor_all(dens)
    t = rho.reshape(layout.dims * 2)
    k = layout.n_network
    for node, u in us.items():
        ids = layout.node_particles(node)
        t = ql.apply_on_axes(t, u, ids)
        t = ql.apply_on_axes(t, u, [k + i for i in ids], conj=True)
    wrapped = tuple(s if isinstance(s, Source) else source_from_density(s, a, d) for s, a in zip(items, arities))
    return NetworkState(layout, rho=t.reshape(n, n), sources=wrapped, unitaries=us)


@dataclass(frozen=True)
class MixtureSpec:
    """Finite classical mixture: weights p_lambda and per-branch (sources, unitaries)."""

    weights: tuple[float, ...]
    branches: tuple[tuple[Sequence | Mapping, Mapping[str, np.ndarray] | None], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != len(self.branches) or not self.weights:
            raise ValueError("need one weight per branch")
        if any(not 0 < w <= 1 for w in self.weights):
            raise ValueError("weights must lie in (0, 1]")
        if abs(sum(self.weights) - 1) > 1e-12:
            raise ValueError("weights must sum to 1")

    @property
    def support(self) -> int:
        return len(self.weights)


def build_mixture(topology: str, mix: MixtureSpec) -> NetworkState:
    """Dense density matrix sum_lambda p_lambda rho_lambda of network states."""
    layout = None
    rho = None
    branches = []
    for w, (sources, unitaries) in zip(mix.weights, mix.branches):
        state = build_network(topology, sources, unitaries)
        if layout is None:
            layout = state.network_layout
            n = prod(layout.dims)
            ql.check_matrix_dim(n)
            if n >= 4096:
                warnings.warn(f"{topology} mixture uses a dense {n}x{n} matrix", RuntimeWarning, stacklevel=2)
            rho = np.zeros((n, n), dtype=complex)
        rho += w * state.density()
        branches.append((w, state))
    return NetworkState(layout, rho=rho, mixture=tuple(branches))


# ---------------------------------------------------------------------------
# random draws used by experiments and checks


def random_unitaries(layout: SystemLayout, rng: np.random.Generator) -> dict[str, np.ndarray]:
    return {node: haar_unitary(layout.node_dim(node), rng) for node in layout.nodes}


def random_spec(
    arity: int,
    d: int,
    rng: np.random.Generator,
    kind: str = "any",
    family: str = "generic",
    max_rank: int | None = None,
) -> SourceSpec:
    """Uniform draw of admissible ranks: rank in [1, d^arity], marginals in [1, d].

    ``kind`` restricts to pure or mixed draws; infeasible combinations are
    redrawn.
    """
    if family == "ghz":
        return SourceSpec(arity, d, "pure", 1, (d,) * arity, "ghz")
    hi = d**arity if max_rank is None else min(d**arity, max_rank)
    while True:
        if kind == "pure":
            k = int(rng.integers(1, d + 1))
            rank, marg = 1, (k,) * arity if arity == 2 else tuple(int(x) for x in rng.integers(1, d + 1, arity))
        else:
            lo = 2 if kind == "mixed" else 1
            rank = int(rng.integers(lo, hi + 1))
            marg = tuple(int(x) for x in rng.integers(1, d + 1, arity))
        spec = SourceSpec(arity, d, "pure" if rank == 1 else "mixed", rank, marg)
        try:
            spec.check_feasible()
        except InfeasibleSourceError:
            continue
        return spec


def random_specs(
    topology: str,
    d: int,
    rng: np.random.Generator,
    kind: str = "any",
    family: str = "generic",
) -> list[SourceSpec]:
    """One spec per source, keeping the purified global vector within the size cap."""
    arities = [len(nodes) for _, nodes in INCIDENCE[topology]]
    budget = tol.MAX_VECTOR_DIM // prod(incidence(topology, d).dims)
    floor = 2 if kind == "mixed" else 1
    specs = []
    for i, arity in enumerate(arities):
        reserve = floor ** (len(arities) - i - 1)
        spec = random_spec(arity, d, rng, kind, family, max_rank=budget // reserve)
        budget //= spec.rank
        specs.append(spec)
    return specs


def random_network(
    topology: str,
    rng: np.random.Generator,
    d: int = 2,
    kind: str = "pure",
    family: str = "generic",
    unitaries: str = "haar",
    specs: Sequence[SourceSpec] | None = None,
) -> NetworkState:
    if specs is None:
        specs = random_specs(topology, d, rng, kind, family)
    sources = [sample_source(s, rng) for s in specs]
    us = random_unitaries(incidence(topology, d), rng) if unitaries == "haar" else None
    return build_network(topology, sources, us)
