"""Dense complex linear algebra kernel.

Index convention: factor 0 is the most significant tensor factor, i.e. a
matrix on factors with dimensions ``dims`` is the Kronecker product
``M0 (x) M1 (x) ...`` and reshapes to ``dims + dims`` with row indices first.
No function here clamps eigenvalues; that is left to the callers.
"""

from __future__ import annotations

from math import prod
from typing import Iterable, Sequence

import numpy as np

from . import tolerances as tol


class DimensionCapError(ValueError):
    """Raised when an object would exceed the desk-scale size limits."""


def check_vector_dim(dim: int) -> None:
    if dim > tol.MAX_VECTOR_DIM:
        raise DimensionCapError(f"vector dimension {dim} exceeds cap {tol.MAX_VECTOR_DIM}")


def check_matrix_dim(dim: int) -> None:
    if dim > tol.MAX_MATRIX_DIM:
        raise DimensionCapError(
            f"matrix dimension {dim}x{dim} exceeds cap {tol.MAX_MATRIX_DIM}x{tol.MAX_MATRIX_DIM}"
        )


def _square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _check_layout(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if prod(dims) != m.shape[0]:
        raise ValueError(f"layout {dims} (product {prod(dims)}) does not match matrix size {m.shape[0]}")
    return dims


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` as the most significant factor."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > tol.MAX_MATRIX_DIM or cols > tol.MAX_MATRIX_DIM:
        if min(rows, cols) == 1:
            check_vector_dim(max(rows, cols))
        else:
            check_matrix_dim(max(rows, cols))
    return np.kron(a, b)


def tensor_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = tensor(out, m)
    return out


def kron_vectors(vecs: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vecs:
        check_vector_dim(out.size * np.asarray(v).size)
        out = np.kron(out, v)
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not in ``keep``.

    Kept factors stay in their original relative order. An empty ``keep``
    returns the 1x1 matrix holding the trace.
    """
    m = _square(m)
    dims = _check_layout(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep {keep} out of range for {n} factors")
    drop = [i for i in range(n) if i not in keep]
    dk = prod(dims[i] for i in keep)
    dd = prod(dims[i] for i in drop)
    t = m.reshape(dims + dims)
    order = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    t = t.transpose(order).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def partial_transpose(m: np.ndarray, dims: Sequence[int], flip: Iterable[int]) -> np.ndarray:
    """Transpose the factors listed in ``flip`` and leave the rest alone."""
    m = _square(m)
    dims = _check_layout(m, dims)
    n = len(dims)
    flip = set(int(f) for f in flip)
    if any(f < 0 or f >= n for f in flip):
        raise ValueError(f"flip {sorted(flip)} out of range for {n} factors")
    order = list(range(2 * n))
    for f in flip:
        order[f], order[n + f] = n + f, f
    return m.reshape(dims + dims).transpose(order).reshape(m.shape)


def is_hermitian(m: np.ndarray, atol: float = tol.HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= atol)


def hermitian_spectrum(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted in descending order."""
    m = _square(m)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(m)[::-1]


def numerical_rank(s: np.ndarray, tol_rel: float = tol.RANK_RTOL) -> int:
    """Number of eigenvalues above ``tol_rel`` times the largest one."""
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        return 0
    return int(np.count_nonzero(s > tol_rel * max(float(s.max()), 1e-300)))


def trace_norm(m: np.ndarray, hermitian: bool | None = None) -> float:
    """Sum of singular values (sum of |eigenvalues| on the Hermitian path)."""
    m = _square(m)
    if hermitian is None:
        hermitian = is_hermitian(m)
    if hermitian:
        return float(np.sum(np.abs(np.linalg.eigvalsh(m))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def apply_on_axes(t: np.ndarray, op: np.ndarray, axes: Sequence[int], conj: bool = False) -> np.ndarray:
    """Contract ``op`` into the listed axes of tensor ``t``.

    ``op`` acts on the composite space of ``axes`` (first axis most
    significant). With ``conj=True`` the complex conjugate of ``op`` is used,
    which is what the column indices of ``rho`` need for ``rho -> K rho K^dag``.
    """
    axes = list(axes)
    sub = [t.shape[a] for a in axes]
    k = len(axes)
    op = np.asarray(op)
    if op.shape != (prod(sub), prod(sub)):
        raise ValueError(f"operator shape {op.shape} does not match axes dims {sub}")
    op_t = (op.conj() if conj else op).reshape(sub + sub)
    out = np.tensordot(op_t, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def marginal_matrix(psi: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reshape a pure state into a ``dim(keep) x dim(rest)`` matrix."""
    dims = tuple(int(d) for d in dims)
    psi = np.asarray(psi)
    if prod(dims) != psi.size:
        raise ValueError(f"layout {dims} does not match vector of size {psi.size}")
    keep = sorted(set(int(k) for k in keep))
    rest = [i for i in range(len(dims)) if i not in keep]
    dk = prod(dims[i] for i in keep)
    return psi.reshape(dims).transpose(keep + rest).reshape(dk, -1)


def reduced_from_pure(psi: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    m = marginal_matrix(psi, dims, keep)
    check_matrix_dim(m.shape[0])
    return m @ m.conj().T


def pure_marginal_spectrum(psi: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Descending spectrum of the reduced state of a pure vector.

    Uses the singular values of the bipartite reshaping, so the cost is set by
    the smaller side of the cut and no density matrix is formed.
    """
    m = marginal_matrix(psi, dims, keep)
    s = np.linalg.svd(m, compute_uv=False)
    spec = np.zeros(m.shape[0])
    spec[: s.size] = s**2
    return spec
