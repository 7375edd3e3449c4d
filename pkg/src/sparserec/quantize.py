"""Uniform scalar quantization and quantization-consistent recovery."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import InvalidParameterError, as_matrix, as_vector
from .solvers import SolveResult, SolverConfig, solve_bpdn

__all__ = [
    "QuantizerConfig",
    "OffLatticeWarning",
    "quantize",
    "is_consistent",
    "solve_qcbp",
    "high_res_noise_bound",
]

# Largest |z|/theta whose lattice index is exactly representable.
_MAX_INDEX = 2.0**52


class OffLatticeWarning(UserWarning):
    """Measurements do not lie on the lattice ``theta * Z + theta / 2``."""


@dataclass(frozen=True)
class QuantizerConfig:
    theta: float

    def __post_init__(self):
        _check_theta(self.theta)


def _check_theta(theta: float) -> float:
    if not (theta > 0 and math.isfinite(theta)):
        raise InvalidParameterError(f"theta must be positive and finite, got {theta}")
    return float(theta)


def quantize(z, theta: float) -> np.ndarray:
    """``theta * floor(z / theta) + theta / 2`` entrywise.

    Bin edges go up: ``z = k * theta`` lands in ``[k theta, (k+1) theta)``.
    """
    theta = _check_theta(theta)
    z = as_vector(z, "z")
    ratio = z / theta
    if np.any(np.abs(ratio) > _MAX_INDEX):
        raise InvalidParameterError("|z|/theta exceeds 2**52; lattice index not exact")
    return theta * np.floor(ratio) + theta / 2.0


def _on_lattice(y: np.ndarray, theta: float) -> bool:
    k = y / theta - 0.5
    return bool(np.all(np.abs(k - np.round(k)) <= 1e-9 * np.maximum(1.0, np.abs(k))))


def is_consistent(A, x, y, theta: float) -> bool:
    """Whether ``A x - y`` lies in the half-open box ``[-theta/2, theta/2)**m``.

    Off-lattice ``y`` triggers an :class:`OffLatticeWarning`; the check is still made.
    """
    theta = _check_theta(theta)
    A = as_matrix(A)
    x = as_vector(x)
    y = as_vector(y, "y")
    if A.shape != (y.size, x.size):
        raise InvalidParameterError(f"shapes do not match: A {A.shape}, x {x.size}, y {y.size}")
    if not _on_lattice(y, theta):
        warnings.warn("y is not on the quantizer lattice", OffLatticeWarning, stacklevel=2)
    r = A @ x - y
    h = theta / 2.0
    return bool(np.all((r >= -h) & (r < h)))


def solve_qcbp(A, y, theta: float, cfg: SolverConfig | None = None) -> tuple[SolveResult, bool]:
    """Basis pursuit over the closed box ``||Az - y||_inf <= theta/2``.

    The half-open program may have no minimiser; the closed-box solution is
    returned together with its consistency flag rather than being perturbed.
    The flag judges the box edges up to the solver's feasibility tolerance
    (closed edge widened, open edge shrunk), so it reflects the optimum rather
    than which side of an edge the iterate happened to stop on.
    """
    theta = _check_theta(theta)
    cfg = cfg or SolverConfig()
    A = as_matrix(A)
    y = as_vector(y, "y")
    h = theta / 2.0
    res = solve_bpdn(A, y, math.inf, h, cfg)
    if not _on_lattice(y, theta):
        warnings.warn("y is not on the quantizer lattice", OffLatticeWarning, stacklevel=2)
    slack = cfg.tol_feas * max(1.0, h)
    r = A @ res.estimate - y
    ok = bool(np.all((r >= -h - slack) & (r < h - slack)))
    return res, ok


def high_res_noise_bound(theta: float, p: float, m: int, t: float) -> tuple[float, float]:
    """Budget ``eps_p`` for ``||e||_p`` with ``e`` uniform on ``[-theta/2, theta/2]**m``.

    Returns ``(eps_p, probability)`` where
    ``eps_p = theta / (2 (p+1)**(1/p)) * (m + t (p+1) sqrt(m))**(1/p)`` holds with
    probability at least ``1 - exp(-2 t**2)``.
    """
    theta = _check_theta(theta)
    if not (p >= 1 and math.isfinite(p)):
        raise InvalidParameterError(f"p must be finite and >= 1, got {p}")
    if m < 1 or t < 0:
        raise InvalidParameterError("need m >= 1 and t >= 0")
    val = theta / (2.0 * (p + 1.0) ** (1.0 / p)) * (m + t * (p + 1.0) * math.sqrt(m)) ** (1.0 / p)
    return float(val), float(1.0 - math.exp(-2.0 * t * t))
