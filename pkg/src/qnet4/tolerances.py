"""Numerical tolerances used across the package.

All entropies are in bits. Every check in :mod:`qnet4.certify` reads its
threshold from here so that a single table documents the whole suite.
"""

import sys
from contextlib import contextmanager

# qlinalg
HERMITIAN_ATOL = 1e-10
RANK_RTOL = 1e-8  # relative to the largest eigenvalue
MAX_VECTOR_DIM = 2**18
MAX_MATRIX_DIM = 4096

# infotheory
EIGEN_ZERO = 1e-12  # eigenvalues at or below this count as exact zeros
EIGEN_NEGATIVE = -1e-9  # below this the input is not a density matrix
TRACE_ATOL = 1e-8

# certify
I4_ZERO = 1e-7  # |I4| of a network state
CHANNEL_SIGN = 1e-9  # I4 after one/two local channels must be >= -this
BOUNDS_SLACK = 1e-8  # three-channel sandwich and the five I3 sign conditions
IDENTITY = 1e-9  # algebraic identities between I_n formulas
STRUCTURAL = 1e-8  # structural entropy vs dense entropy
ADDITIVITY = 1e-7  # log-negativity additivity
SSA_SLACK = 1e-8
GME_ENTROPY = 1e-6  # bipartition entropy threshold for the pure-state GME test
KRAUS_COMPLETENESS = 1e-9
UNITARITY = 1e-10

TABLE = {
    "hermitian_atol": HERMITIAN_ATOL,
    "rank_rtol": RANK_RTOL,
    "eigen_zero": EIGEN_ZERO,
    "eigen_negative": EIGEN_NEGATIVE,
    "trace_atol": TRACE_ATOL,
    "i4_zero": I4_ZERO,
    "channel_sign": CHANNEL_SIGN,
    "bounds_slack": BOUNDS_SLACK,
    "identity": IDENTITY,
    "structural": STRUCTURAL,
    "additivity": ADDITIVITY,
    "ssa_slack": SSA_SLACK,
    "gme_entropy": GME_ENTROPY,
    "kraus_completeness": KRAUS_COMPLETENESS,
    "unitarity": UNITARITY,
}

TABLE_KEYS = frozenset(k.upper() for k in TABLE)

# assertion thresholds that a single ``--tol-entropy`` value replaces
ENTROPIC = ("I4_ZERO", "CHANNEL_SIGN", "BOUNDS_SLACK", "IDENTITY", "STRUCTURAL", "ADDITIVITY", "SSA_SLACK")


@contextmanager
def overridden(**values: float):
    """Temporarily replace module-level tolerances, e.g. ``overridden(I4_ZERO=1e-6)``."""
    module = sys.modules[__name__]
    unknown = [k for k in values if k not in TABLE_KEYS]
    if unknown:
        raise KeyError(f"unknown tolerances {unknown}")
    saved = {k: getattr(module, k) for k in values}
    try:
        for k, v in values.items():
            setattr(module, k, float(v))
        yield
    finally:
        for k, v in saved.items():
            setattr(module, k, v)
