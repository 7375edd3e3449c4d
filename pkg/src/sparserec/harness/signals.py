"""Ground-truth signals for recovery experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import InvalidParameterError

__all__ = ["SIGNAL_KINDS", "SignalSpec", "generate_signal"]

SIGNAL_KINDS = ("flat_signs", "gaussian_coeffs", "compressible")
NORMALIZATIONS = ("none", "unit_l2")


@dataclass(frozen=True)
class SignalSpec:
    """Target signal family.

    ``flat_signs`` puts random signs on a random support of size ``s``;
    ``gaussian_coeffs`` standard normal values there. ``compressible`` fills all
    ``n`` entries with magnitudes ``i**-alpha`` (random order and signs), so the
    best ``s``-term error is positive.
    """

    n: int
    s: int
    kind: str = "gaussian_coeffs"
    alpha: float = 1.0
    normalize: str = "none"

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.s <= self.n:
            raise InvalidParameterError(f"need n >= 1 and 0 <= s <= n, got n={self.n}, s={self.s}")
        if self.kind not in SIGNAL_KINDS:
            raise InvalidParameterError(f"unknown signal kind {self.kind!r}; expected one of {SIGNAL_KINDS}")
        if not self.alpha > 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha}")
        if self.normalize not in NORMALIZATIONS:
            raise InvalidParameterError(f"normalize must be one of {NORMALIZATIONS}")


def generate_signal(spec: SignalSpec, rng: np.random.Generator) -> np.ndarray:
    n, s = spec.n, spec.s
    x = np.zeros(n)
    if spec.kind == "compressible":
        mags = np.arange(1, n + 1, dtype=float) ** -spec.alpha
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        x[rng.permutation(n)] = signs * mags
    else:
        support = rng.choice(n, s, replace=False)
        if spec.kind == "flat_signs":
            x[support] = np.where(rng.random(s) < 0.5, -1.0, 1.0)
        else:
            x[support] = rng.standard_normal(s)
    if spec.normalize == "unit_l2":
        nrm = np.linalg.norm(x)
        if nrm > 0:
            x /= nrm
    return x
