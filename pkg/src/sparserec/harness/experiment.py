"""Seeded recovery trials, parameter sweeps and CSV output."""

from __future__ import annotations

import csv
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from ..core import InvalidParameterError, best_s_term_error, lp_norm
from ..ensembles import EnsembleSpec, rng_stream, sample_matrix
from ..quantize import quantize, solve_qcbp
from ..solvers import SolverConfig, solve_bpdn
from .signals import SignalSpec, generate_signal

__all__ = [
    "EPSILON_RULES",
    "SUCCESS_RTOL",
    "ExperimentConfig",
    "TrialRecord",
    "PhaseCell",
    "SlopeReport",
    "optimal_m",
    "trial_seed",
    "run_experiment",
    "phase_grid",
    "noise_scaling_sweep",
    "write_csv",
    "write_rows",
    "TRIAL_FIELDS",
]

EPSILON_RULES = ("fixed", "noise_scaled", "noise_aligned", "quantizer")

# A trial succeeds when err_l2 <= SUCCESS_RTOL * max(1, ||x||_2).
SUCCESS_RTOL = 1e-6

_SEED_MASK = (1 << 64) - 1


def optimal_m(n: int, s: int, prefactor: float = 4.0) -> int:
    """``ceil(prefactor * ceil(s log(e n / s)))``, the optimal-regime row count."""
    return int(math.ceil(prefactor * math.ceil(s * math.log(math.e * n / s))))


@dataclass(frozen=True)
class ExperimentConfig:
    """A full sweep: matrix law, signal law, program and trial layout.

    ``epsilon_rule`` selects the measurement error: ``fixed`` adds none and solves
    with radius ``epsilon``; ``noise_scaled`` adds ``e`` with ``||e||_p = epsilon``
    exactly for Gaussian ``v`` in ``e = epsilon v / ||v||_p``; ``noise_aligned`` is
    the same with ``v = A g`` for ``g`` Gaussian on the signal support, the least
    favourable direction for the error; ``quantizer`` quantizes ``A x`` with bin
    width ``epsilon`` and solves the closed-box program. ``q`` names the extra
    error norm reported as ``err_lq``; ``r`` is kept for the error-bound exponent.
    """

    ensemble: EnsembleSpec
    signal: SignalSpec
    m_values: tuple[int, ...]
    trials: int = 1
    p: float = 2.0
    q: float = 2.0
    r: float = 2.0
    epsilon_rule: str = "fixed"
    epsilon: float = 0.0
    base_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        if not self.m_values or any(m < 1 for m in self.m_values):
            raise InvalidParameterError("m_values must be a nonempty list of positive integers")
        # per-trial m and seed are filled in at run time
        object.__setattr__(self, "ensemble", self.ensemble.with_dims(m=self.m_values[0], seed=0))
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if self.epsilon_rule not in EPSILON_RULES:
            raise InvalidParameterError(f"epsilon_rule must be one of {EPSILON_RULES}, got {self.epsilon_rule!r}")
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise InvalidParameterError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if self.epsilon_rule == "quantizer" and self.epsilon <= 0:
            raise InvalidParameterError("the quantizer rule needs a positive bin width epsilon")
        if self.ensemble.n != self.signal.n:
            raise InvalidParameterError(f"ensemble n={self.ensemble.n} differs from signal n={self.signal.n}")
        if self.q < 1 or self.r < 1 or self.p < 1:
            raise InvalidParameterError("p, q and r must be >= 1")
        if not 0 <= self.base_seed <= _SEED_MASK:
            raise InvalidParameterError("base_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    m: int
    n: int
    s: int
    seed: int
    err_l1: float
    err_l2: float
    err_lq: float
    sigma_s_l1: float
    eps_used: float
    objective: float
    status: str
    consistent: bool | None = None
    wall_time_ms: float | None = None


def trial_seed(base_seed: int, global_index: int) -> int:
    """``base_seed XOR global_index``; injective in the index for fixed ``base_seed``."""
    return (int(base_seed) ^ int(global_index)) & _SEED_MASK


def _run_trial(cfg: ExperimentConfig, m: int, global_index: int, timings: bool) -> tuple[TrialRecord, float]:
    start = time.perf_counter()
    seed = trial_seed(cfg.base_seed, global_index)
    A = sample_matrix(cfg.ensemble.with_dims(m=m, seed=seed))
    x = generate_signal(cfg.signal, rng_stream(seed, 1))
    clean = A @ x
    consistent = None
    if cfg.epsilon_rule == "quantizer":
        y = quantize(clean, cfg.epsilon)
        eps = cfg.epsilon / 2.0
        res, consistent = solve_qcbp(A, y, cfg.epsilon, cfg.solver)
    else:
        eps = cfg.epsilon
        y = clean
        if cfg.epsilon_rule == "noise_scaled" and eps > 0:
            v = rng_stream(seed, 2).standard_normal(m)
            y = clean + eps * v / lp_norm(v, cfg.p)
        elif cfg.epsilon_rule == "noise_aligned" and eps > 0:
            support = np.flatnonzero(x)
            g = np.zeros_like(x)
            g[support] = rng_stream(seed, 2).standard_normal(support.size)
            v = A @ g
            if np.any(v):
                y = clean + eps * v / lp_norm(v, cfg.p)
        res = solve_bpdn(A, y, cfg.p, eps, cfg.solver)
    d = res.estimate - x
    rec = TrialRecord(
        trial_id=global_index,
        m=m,
        n=cfg.signal.n,
        s=cfg.signal.s,
        seed=seed,
        err_l1=lp_norm(d, 1),
        err_l2=lp_norm(d, 2),
        err_lq=lp_norm(d, cfg.q),
        sigma_s_l1=best_s_term_error(x, cfg.signal.s),
        eps_used=eps,
        objective=res.objective,
        status=res.status,
        consistent=consistent,
        wall_time_ms=(time.perf_counter() - start) * 1e3 if timings else None,
    )
    return rec, float(np.linalg.norm(x))


def _run_all(cfg: ExperimentConfig, threads: int, timings: bool) -> list[tuple[TrialRecord, float]]:
    if threads < 1:
        raise InvalidParameterError(f"threads must be >= 1, got {threads}")
    jobs = [(m, i * cfg.trials + t) for i, m in enumerate(cfg.m_values) for t in range(cfg.trials)]
    if threads == 1:
        return [_run_trial(cfg, m, g, timings) for m, g in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map() yields in submission order whatever the completion order
        return list(pool.map(lambda job: _run_trial(cfg, job[0], job[1], timings), jobs))


def run_experiment(cfg: ExperimentConfig, threads: int = 1, timings: bool = False) -> list[TrialRecord]:
    """Run every ``(m, trial)`` pair of ``cfg``; records are ordered by trial id.

    Trial ``t`` at the ``i``-th row count uses seed ``base_seed XOR (i*trials + t)``:
    stream 0 draws ``A``, stream 1 the signal, stream 2 the noise. Wall times are
    recorded only when ``timings`` is set, so default output is reproducible.
    """
    return [rec for rec, _ in _run_all(cfg, threads, timings)]


@dataclass(frozen=True)
class PhaseCell:
    m: int
    s: int
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials


def phase_grid(cfg: ExperimentConfig, m_list: Sequence[int], s_list: Sequence[int], threads: int = 1) -> list[PhaseCell]:
    """Success counts per ``(m, s)`` cell, ``err_l2 <= 1e-6 * max(1, ||x||_2)``."""
    if not m_list or not s_list:
        raise InvalidParameterError("m_list and s_list must be nonempty")
    cells = []
    for s in s_list:
        sub = ExperimentConfig(
            ensemble=cfg.ensemble, signal=SignalSpec(cfg.signal.n, s, cfg.signal.kind, cfg.signal.alpha, cfg.signal.normalize),
            m_values=tuple(m_list), trials=cfg.trials, p=cfg.p, q=cfg.q, r=cfg.r,
            epsilon_rule=cfg.epsilon_rule, epsilon=cfg.epsilon, base_seed=cfg.base_seed, solver=cfg.solver,
        )
        results = _run_all(sub, threads, False)
        for m in m_list:
            ok = sum(rec.err_l2 <= SUCCESS_RTOL * max(1.0, xn) for rec, xn in results if rec.m == m)
            cells.append(PhaseCell(m=m, s=s, trials=cfg.trials * list(m_list).count(m), successes=ok))
    return cells


@dataclass(frozen=True)
class SlopeReport:
    """Least-squares slope of ``log(median err_l2)`` against ``log m``."""

    p: float
    m_values: tuple[int, ...]
    medians: tuple[float, ...]
    slope: float
    ci_low: float
    ci_high: float
    expected: float
    skipped: bool = False
    reason: str = ""


def noise_scaling_sweep(cfg: ExperimentConfig, threads: int = 1, records: list[TrialRecord] | None = None) -> SlopeReport:
    """Median error against ``m`` on a log-log grid, with a 95% band for the slope.

    With ``epsilon = 0`` the errors sit at the solver floor; the fit is then
    skipped and flagged.
    """
    if cfg.epsilon_rule not in ("noise_scaled", "noise_aligned"):
        raise InvalidParameterError("noise_scaling_sweep needs epsilon_rule = noise_scaled or noise_aligned")
    if cfg.p not in (1.0, 2.0):
        raise InvalidParameterError(f"noise_scaling_sweep supports p in {{1, 2}}, got {cfg.p}")
    if records is None:
        records = run_experiment(cfg, threads)
    ms = cfg.m_values
    medians = tuple(float(np.median([r.err_l2 for r in records if r.m == m])) for m in ms)
    expected = -1.0 / cfg.p
    if cfg.epsilon == 0:
        return SlopeReport(cfg.p, ms, medians, math.nan, math.nan, math.nan, expected, True, "epsilon = 0: errors at solver floor")
    if len(set(ms)) < 3:
        raise InvalidParameterError("the slope fit needs at least three distinct m values")
    fit = stats.linregress(np.log(ms), np.log(medians))
    half = stats.t.ppf(0.975, len(ms) - 2) * fit.stderr
    return SlopeReport(cfg.p, ms, medians, float(fit.slope), float(fit.slope - half), float(fit.slope + half), expected)


# -- CSV ----------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write a CSV atomically (temp file in the target directory, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


TRIAL_FIELDS = tuple(f.name for f in fields(TrialRecord))


def write_csv(records: Iterable[TrialRecord], path) -> None:
    """One row per record under a header of the :class:`TrialRecord` field names."""
    write_rows(path, TRIAL_FIELDS, ([getattr(r, k) for k in TRIAL_FIELDS] for r in records))
