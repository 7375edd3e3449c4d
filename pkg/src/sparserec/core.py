"""Vector primitives and sparse-recovery geometry.

Vectors and matrices are plain real ``numpy`` arrays (1-d and 2-d). The
functions here are pure; none of them modify their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "NORM_RTOL",
    "InvalidParameterError",
    "ConeParams",
    "as_vector",
    "as_matrix",
    "rearrangement",
    "top_s_indices",
    "lp_norm",
    "best_s_term_error",
    "dsq_norm",
    "cone_membership",
    "read_matrix",
    "write_matrix",
    "read_vector",
    "write_vector",
]

# Relative tolerance for norm identities (homogeneity, triangle inequality, ...).
NORM_RTOL = 1e-10


class InvalidParameterError(ValueError):
    """Raised when an argument is outside the domain of an operation."""


@dataclass(frozen=True)
class ConeParams:
    """Parameters ``(rho, s, q)`` of the cone of vectors whose top-``s``
    ``l_q`` mass dominates ``rho / s**(1 - 1/q)`` times the ``l_1`` tail."""

    rho: float
    s: int
    q: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise InvalidParameterError(f"rho must lie in (0, 1), got {self.rho}")
        if int(self.s) != self.s or self.s < 1:
            raise InvalidParameterError(f"s must be a positive integer, got {self.s}")
        if not self.q >= 1.0 or math.isinf(self.q):
            raise InvalidParameterError(f"q must be finite and >= 1, got {self.q}")

    def validate_dimension(self, n: int) -> None:
        if self.s > n:
            raise InvalidParameterError(f"s={self.s} exceeds dimension n={n}")


def as_vector(x, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty 1-d array")
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    return x


def as_matrix(A, name: str = "A") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise InvalidParameterError(f"{name} must be a non-empty 2-d array")
    if not np.all(np.isfinite(A)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    return A


def _check_sparsity(s, n: int, lower: int = 0) -> int:
    if int(s) != s or s < lower or s > n:
        raise InvalidParameterError(f"sparsity s={s} must be an integer in [{lower}, {n}]")
    return int(s)


def top_s_indices(x, s: int) -> np.ndarray:
    """Indices of the ``s`` largest absolute entries, ties to the lowest index."""
    x = as_vector(x)
    s = _check_sparsity(s, x.size)
    order = np.argsort(-np.abs(x), kind="stable")
    return order[:s]


def rearrangement(x) -> np.ndarray:
    """Nonincreasing rearrangement ``x*`` of ``|x|``."""
    x = as_vector(x)
    order = np.argsort(-np.abs(x), kind="stable")
    return np.abs(x)[order]


def lp_norm(x, p: float) -> float:
    """``l_p`` norm for ``1 <= p <= inf``.

    Finite ``p > 1`` is evaluated after scaling by ``max|x_j|`` so that
    ``|x_j|**p`` can neither overflow nor underflow.
    """
    x = np.asarray(x, dtype=float)
    p = float(p)
    if not p >= 1.0:
        raise InvalidParameterError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(x)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 1.0:
        return float(a.sum())
    amax = float(a.max()) if a.size else 0.0
    if amax == 0.0:
        return 0.0
    return amax * float(np.sum((a / amax) ** p)) ** (1.0 / p)


def best_s_term_error(x, s: int) -> float:
    """``sigma_s(x)_1``: the ``l_1`` distance from ``x`` to the ``s``-sparse vectors."""
    x = as_vector(x)
    s = _check_sparsity(s, x.size)
    return float(np.sum(rearrangement(x)[s:]))


def dsq_norm(x, s: int, q: float) -> float:
    """Norm whose unit ball is the convex hull of the ``s``-sparse unit-``l_q`` vectors.

    The rearrangement is cut into consecutive blocks of length ``s`` (the last
    block may be shorter) and the blockwise ``l_q`` norms are summed.
    """
    x = as_vector(x)
    s = _check_sparsity(s, x.size, lower=1)
    if not q >= 1.0 or math.isinf(q):
        raise InvalidParameterError(f"q must be finite and >= 1, got {q}")
    xs = rearrangement(x)
    return float(sum(lp_norm(xs[i:i + s], q) for i in range(0, xs.size, s)))


def cone_membership(x, cp: ConeParams) -> tuple[bool, float]:
    """Test membership in the cone ``T_{rho,s}^q``.

    Returns ``(member, margin)`` with
    ``margin = ||x_S||_q - rho / s**(1-1/q) * ||x_{S^c}||_1`` for ``S`` the
    support of the ``s`` largest entries. That choice of ``S`` maximises the
    first term and minimises the second, so it decides membership for every
    ``S`` of size ``s``.
    """
    x = as_vector(x)
    cp.validate_dimension(x.size)
    if not np.any(x):
        raise InvalidParameterError("cone membership is undefined for the zero vector")
    S = top_s_indices(x, cp.s)
    mask = np.zeros(x.size, dtype=bool)
    mask[S] = True
    head = lp_norm(x[mask], cp.q)
    tail = float(np.abs(x[~mask]).sum())
    margin = head - cp.rho / cp.s ** (1.0 - 1.0 / cp.q) * tail
    return bool(margin >= 0.0), float(margin)


# -- text format ------------------------------------------------------------
#
# First line "m n" (matrix) or "n" (vector), then the entries row by row.

def _format(v: float) -> str:
    return "%.17g" % v


def write_matrix(path, A) -> None:
    A = as_matrix(A)
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [" ".join(_format(v) for v in row) for row in A]
    Path(path).write_text("\n".join(lines) + "\n")


def write_vector(path, x) -> None:
    x = as_vector(x)
    lines = [str(x.size), " ".join(_format(v) for v in x)]
    Path(path).write_text("\n".join(lines) + "\n")


def _read_tokens(path):
    text = Path(path).read_text()
    head, _, body = text.partition("\n")
    try:
        dims = [int(t) for t in head.split()]
        values = np.array([float(t) for t in body.split()], dtype=float)
    except ValueError as exc:
        raise InvalidParameterError(f"{path}: malformed numeric data ({exc})") from None
    return dims, values


def read_matrix(path) -> np.ndarray:
    dims, values = _read_tokens(path)
    if len(dims) != 2:
        raise InvalidParameterError(f"{path}: header must be 'm n'")
    m, n = dims
    if values.size != m * n:
        raise InvalidParameterError(f"{path}: expected {m * n} entries, found {values.size}")
    return as_matrix(values.reshape(m, n))


def read_vector(path) -> np.ndarray:
    dims, values = _read_tokens(path)
    if len(dims) != 1:
        raise InvalidParameterError(f"{path}: header must be 'n'")
    if values.size != dims[0]:
        raise InvalidParameterError(f"{path}: expected {dims[0]} entries, found {values.size}")
    return as_vector(values)
