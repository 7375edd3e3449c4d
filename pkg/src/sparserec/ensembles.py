"""Seeded samplers for random measurement matrices.

All randomness flows through :func:`rng_stream`, a Philox4x64 counter-based
generator keyed by ``(seed, stream)``. A given ``(seed, stream)`` pair yields the
same draws on every platform for a fixed numpy version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate, special

from .core import InvalidParameterError

__all__ = [
    "RNG_ALGORITHM",
    "KINDS",
    "IID_KINDS",
    "EnsembleSpec",
    "EntryDistribution",
    "rng_stream",
    "sample_matrix",
    "sample_rows",
    "sample_iid_matrix",
    "l1ball_isotropic_radius",
    "heavy_tail_pdf",
    "heavy_tail_moment",
    "entry_moment",
    "quadrature_moment",
    "moment_condition_check",
    "MomentReport",
]

RNG_ALGORITHM = "numpy.Philox4x64-10/SeedSequence"

KINDS = ("gaussian", "rademacher", "sym_exponential", "heavy_tail", "logconcave_l1ball")
IID_KINDS = KINDS[:4]

_SEED_MASK = (1 << 64) - 1


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for substream ``stream`` of a 64-bit ``seed``."""
    seed = int(seed) & _SEED_MASK
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, int(stream)])))


@dataclass(frozen=True)
class EnsembleSpec:
    """A random matrix distribution: ``kind`` plus its parameters.

    ``gamma`` is the tail exponent of ``heavy_tail``; it is ignored otherwise.
    """

    kind: str = "gaussian"
    m: int = 1
    n: int = 1
    seed: int = 0
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        if int(self.m) != self.m or int(self.n) != self.n or self.m < 1 or self.n < 1:
            raise InvalidParameterError(f"dimensions must be positive integers, got m={self.m}, n={self.n}")
        if self.kind == "heavy_tail":
            if self.gamma is None or not self.gamma > 1.0:
                raise InvalidParameterError(f"heavy_tail needs gamma > 1, got {self.gamma}")
        if not 0 <= int(self.seed) <= _SEED_MASK:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")

    @property
    def meets_tail_condition(self) -> bool:
        """Whether ``gamma >= max(log(n) + 2, 6)``, the sufficient condition for
        optimal-regime recovery with heavy-tailed entries."""
        if self.kind != "heavy_tail":
            return True
        return self.gamma >= max(math.log(self.n) + 2.0, 6.0)

    def with_dims(self, m: int | None = None, n: int | None = None, seed: int | None = None) -> "EnsembleSpec":
        return replace(
            self,
            m=self.m if m is None else m,
            n=self.n if n is None else n,
            seed=self.seed if seed is None else seed,
        )

    def to_items(self) -> dict[str, str]:
        items = {"kind": self.kind, "m": str(self.m), "n": str(self.n), "seed": str(self.seed)}
        if self.gamma is not None:
            items["gamma"] = repr(float(self.gamma))
        return items

    @classmethod
    def from_items(cls, items: dict[str, str]) -> "EnsembleSpec":
        known = {"kind", "m", "n", "seed", "gamma"}
        unknown = set(items) - known
        if unknown:
            raise InvalidParameterError(f"unknown ensemble keys: {sorted(unknown)}")
        try:
            return cls(
                kind=items.get("kind", "gaussian"),
                m=int(items.get("m", 1)),
                n=int(items.get("n", 1)),
                seed=int(items.get("seed", 0)),
                gamma=float(items["gamma"]) if "gamma" in items else None,
            )
        except ValueError as exc:
            raise InvalidParameterError(f"bad ensemble value: {exc}") from None


@dataclass(frozen=True)
class EntryDistribution:
    """User-supplied i.i.d. entry law, e.g. a further subgaussian distribution.

    ``sample(rng, shape)`` draws entries; ``pdf`` (symmetric density) enables
    moment quadrature in :func:`moment_condition_check`.
    """

    name: str
    sample: Callable[[np.random.Generator, tuple[int, int]], np.ndarray]
    pdf: Callable[[float], float] | None = None


def l1ball_isotropic_radius(n: int) -> float:
    """Radius making the uniform law on ``r * B_1^n`` isotropic.

    A uniform point of ``B_1^n`` has ``E x_1**2 = 2 / ((n+1)(n+2))`` (Dirichlet
    moments of the ``n+1`` normalised exponential spacings).
    """
    return math.sqrt((n + 1) * (n + 2) / 2.0)


def _heavy_tail(rng: np.random.Generator, shape, gamma: float) -> np.ndarray:
    # Inverse CDF: mass (gamma-1)/gamma uniform on [-1, 1], mass 1/gamma on
    # |x| > 1 with P(|x| > t | tail) = t**(1 - gamma).
    size = int(np.prod(shape))
    body = rng.uniform(-1.0, 1.0, size)
    u = 1.0 - rng.random(size)  # (0, 1]
    tail = u ** (-1.0 / (gamma - 1.0))
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    in_tail = rng.random(size) < 1.0 / gamma
    return np.where(in_tail, sign * tail, body).reshape(shape)


def _l1ball_rows(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    E = rng.standard_exponential((m, n + 1))
    signs = np.where(rng.random((m, n)) < 0.5, -1.0, 1.0)
    X = signs * E[:, :n] / E.sum(axis=1, keepdims=True)
    return l1ball_isotropic_radius(n) * X


def sample_rows(kind: str, m: int, n: int, rng: np.random.Generator, gamma: float | None = None) -> np.ndarray:
    """Draw ``m`` i.i.d. rows of length ``n`` from ``kind`` using ``rng``."""
    if kind == "gaussian":
        return rng.standard_normal((m, n))
    if kind == "rademacher":
        return np.where(rng.random((m, n)) < 0.5, -1.0, 1.0)
    if kind == "sym_exponential":
        return rng.laplace(0.0, 1.0, (m, n))
    if kind == "heavy_tail":
        if gamma is None or not gamma > 1.0:
            raise InvalidParameterError(f"heavy_tail needs gamma > 1, got {gamma}")
        return _heavy_tail(rng, (m, n), gamma)
    if kind == "logconcave_l1ball":
        return _l1ball_rows(rng, m, n)
    raise InvalidParameterError(f"unknown ensemble kind {kind!r}")


def sample_matrix(spec: EnsembleSpec) -> np.ndarray:
    """``m x n`` matrix with i.i.d. rows drawn from ``spec`` (deterministic in ``spec.seed``)."""
    return sample_rows(spec.kind, spec.m, spec.n, rng_stream(spec.seed, 0), spec.gamma)


def sample_iid_matrix(dist: EntryDistribution, m: int, n: int, seed: int) -> np.ndarray:
    A = np.asarray(dist.sample(rng_stream(seed, 0), (m, n)), dtype=float)
    if A.shape != (m, n):
        raise InvalidParameterError(f"{dist.name} sampler returned shape {A.shape}, expected {(m, n)}")
    return A


# -- moments ----------------------------------------------------------------

def heavy_tail_pdf(x, gamma: float):
    x = np.abs(np.asarray(x, dtype=float))
    return (gamma - 1.0) / (2.0 * gamma) * np.minimum(1.0, np.where(x > 0, x, 1.0) ** (-gamma))


def heavy_tail_moment(gamma: float, p: float) -> float:
    """``E|xi|**p`` for the heavy-tailed density; ``inf`` once ``p >= gamma - 1``."""
    if not gamma > 1.0:
        raise InvalidParameterError(f"gamma must exceed 1, got {gamma}")
    if p < 0:
        raise InvalidParameterError(f"moment order must be >= 0, got {p}")
    if p >= gamma - 1.0:
        return math.inf
    return (gamma - 1.0) / gamma * (1.0 / (gamma - p - 1.0) + 1.0 / (p + 1.0))


def entry_moment(kind: str, r: float, gamma: float | None = None) -> float:
    """Closed-form absolute moment ``E|xi|**r`` of an i.i.d.-entry ensemble."""
    if kind == "gaussian":
        return 2.0 ** (r / 2.0) * special.gamma((r + 1.0) / 2.0) / math.sqrt(math.pi)
    if kind == "rademacher":
        return 1.0
    if kind == "sym_exponential":
        return float(special.gamma(r + 1.0))
    if kind == "heavy_tail":
        return heavy_tail_moment(gamma, r)
    raise InvalidParameterError(f"{kind!r} does not have i.i.d. entries")


def quadrature_moment(pdf: Callable[[float], float], r: float, breakpoints=(1.0,)) -> float:
    """``E|xi|**r = 2 * int_0^inf x**r pdf(x) dx`` for a symmetric density."""
    total = 0.0
    edges = [0.0, *sorted(b for b in breakpoints if b > 0)]
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(lambda x: x ** r * pdf(x), a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    total += integrate.quad(lambda x: x ** r * pdf(x), edges[-1], math.inf, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return 2.0 * total


@dataclass(frozen=True)
class MomentReport:
    """Smallest ``lam`` with ``(E|xi|**r)**(1/r) <= lam * r**alpha`` for each ``alpha``."""

    r_values: tuple[int, ...]
    normalized_moments: tuple[float, ...]
    lam: dict[float, float]


def moment_condition_check(spec, n: int, alphas=(0.5, 1.0)) -> MomentReport:
    """Fit the moment-growth constant over ``r = 2, ..., floor(log n)``.

    ``spec`` is an :class:`EnsembleSpec` with an i.i.d.-entry kind (closed-form
    moments) or an :class:`EntryDistribution` carrying a ``pdf`` (quadrature).
    When ``floor(log n) < 2`` only ``r = 2`` is used.
    """
    r_max = max(2, int(math.floor(math.log(n))))
    rs = tuple(range(2, r_max + 1))
    if isinstance(spec, EntryDistribution):
        if spec.pdf is None:
            raise InvalidParameterError(f"{spec.name} has no density for quadrature")
        moments = [quadrature_moment(spec.pdf, r) for r in rs]
    else:
        if spec.kind not in IID_KINDS:
            raise InvalidParameterError(f"{spec.kind!r} does not have i.i.d. entries")
        moments = [entry_moment(spec.kind, r, spec.gamma) for r in rs]
    normed = tuple(mom ** (1.0 / r) for mom, r in zip(moments, rs))
    lam = {a: max(v / r ** a for v, r in zip(normed, rs)) for a in alphas}
    return MomentReport(r_values=rs, normalized_moments=normed, lam=lam)
