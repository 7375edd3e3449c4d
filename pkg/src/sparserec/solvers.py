"""First-order solver for l_p-constrained basis pursuit.

    minimize ||z||_1  subject to  ||A z - y||_p <= eps

is written as ``min_z g(z) + f(Az)`` with ``g = ||.||_1`` and ``f`` the
indicator of the ``eps``-ball around ``y``, and solved with the primal-dual
hybrid gradient iteration (Chambolle-Pock, relaxation 1). The primal step is a
soft threshold; the dual step is a projection onto the ball via Moreau's
identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .core import InvalidParameterError, as_matrix, as_vector, lp_norm
from .prox import _check_p, dual_exponent, project_lp_ball, soft_threshold

__all__ = [
    "SolverConfig",
    "SolveResult",
    "CONVERGED",
    "MAX_ITERS",
    "INFEASIBLE",
    "operator_norm",
    "pdhg",
    "solve_bpdn",
    "solve_bpdn_inf_via_logm",
]

CONVERGED = "converged"
MAX_ITERS = "max_iters"
INFEASIBLE = "infeasible_detected"

# Auto step sizes use this fraction of 1/||A||, which absorbs the (from below)
# error of the power-iteration estimate.
_STEP_SAFETY = 0.98

# Restart thresholds on the KKT error relative to its value at the last restart.
_RESTART_SUFFICIENT = 0.2
_RESTART_NECESSARY = 0.8
_RESTART_ARTIFICIAL = 0.36


@dataclass(frozen=True)
class SolverConfig:
    """Iteration limits, step sizes and stopping tolerances.

    Step sizes refer to the internally normalised problem whose matrix has unit
    operator norm. With both left at ``None`` the steps are ``0.98/omega`` and
    ``0.98*omega`` for a primal weight ``omega`` rebalanced at every restart;
    fixing one or both disables the rebalancing.
    The solve stops when the iterate is feasible to ``tol_feas * max(1, eps)``
    (tightened to ``tol_feas * max(eps, ||y||_p)`` when that is smaller),
    its objective changed by at most ``tol_obj`` (relative) over the last
    ``window`` iterations, and the relative duality gap is at most ``tol_gap``.
    """

    max_iters: int = 20000
    primal_step: float | None = None
    dual_step: float | None = None
    tol_feas: float = 1e-8
    tol_obj: float = 1e-7
    tol_gap: float = 1e-6
    window: int = 100
    check_every: int = 10
    operator_norm_iters: int = 500

    def __post_init__(self):
        if self.max_iters < 1 or self.window < 1 or self.check_every < 1:
            raise InvalidParameterError("max_iters, window and check_every must be positive")
        if self.window % self.check_every:
            raise InvalidParameterError("window must be a multiple of check_every")
        for name in ("primal_step", "dual_step"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidParameterError(f"{name} must be positive, got {v}")
        if min(self.tol_feas, self.tol_obj, self.tol_gap) <= 0:
            raise InvalidParameterError("tolerances must be positive")

    def steps(self) -> tuple[float, float]:
        tau = self.primal_step
        sigma = self.dual_step
        if tau is None and sigma is None:
            return _STEP_SAFETY, _STEP_SAFETY
        if tau is None:
            tau = _STEP_SAFETY**2 / sigma
        if sigma is None:
            sigma = _STEP_SAFETY**2 / tau
        return tau, sigma


@dataclass
class SolveResult:
    estimate: np.ndarray
    status: str
    iterations: int
    feasibility_residual: float
    objective: float
    dual_bound: float = -math.inf
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def operator_norm(A, iters: int = 500, rtol: float = 1e-15) -> float:
    """Spectral norm estimate by power iteration on ``A^T A``.

    Starts from the normalised all-ones vector and returns the square root of
    the last Rayleigh quotient. Stops early once the estimate changes by less
    than ``rtol`` (relative).
    """
    A = as_matrix(A)
    if iters < 1:
        raise InvalidParameterError(f"iters must be >= 1, got {iters}")
    if not np.any(A):
        return 0.0
    v = np.ones(A.shape[1]) / math.sqrt(A.shape[1])
    if not np.any(A.T @ (A @ v)):
        # all-ones lies in the kernel of A^T A; restart on the heaviest column
        v = np.zeros(A.shape[1])
        v[int(np.argmax(np.linalg.norm(A, axis=0)))] = 1.0
    est = 0.0
    for _ in range(iters):
        u = A.T @ (A @ v)
        rq = float(v @ u)
        nu = float(np.linalg.norm(u))
        v = u / nu
        new = math.sqrt(max(rq, 0.0))
        if abs(new - est) <= rtol * new:
            est = new
            break
        est = new
    return est


def pdhg(
    A: np.ndarray,
    prox_primal: Callable[[np.ndarray, float], np.ndarray],
    prox_dual: Callable[[np.ndarray, float], np.ndarray],
    x0: np.ndarray,
    w0: np.ndarray,
    tau: float,
    sigma: float,
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Primal-dual hybrid gradient iterates for ``min_x G(x) + F(A x)``.

    ``prox_primal(v, tau)`` is the prox of ``tau*G``; ``prox_dual(v, sigma)`` the
    prox of ``sigma*F*``. ``x0`` may be a matrix (one problem per column).
    Yields ``(x, w, A @ x)`` after every iteration.
    """
    x, w = x0, w0
    Ax = A @ x
    AT = A.T
    while True:
        x_new = prox_primal(x - tau * (AT @ w), tau)
        Ax_new = A @ x_new
        w = prox_dual(w + sigma * (2.0 * Ax_new - Ax), sigma)
        x, Ax = x_new, Ax_new
        yield x, w, Ax


def _farkas_certificate(A: np.ndarray, y: np.ndarray, eps: float, p: float, d: np.ndarray) -> bool:
    """True when ``d`` (projected on ker A^T) proves ``||Az - y||_p > eps`` for all z."""
    coef, *_ = np.linalg.lstsq(A, d, rcond=None)
    d = d - A @ coef
    dn = float(np.linalg.norm(d))
    if dn == 0.0:
        return False
    d = d / dn
    if np.abs(A.T @ d).max() > 1e-10 * max(1.0, float(np.abs(A).max())):
        return False
    slack = abs(float(d @ y)) - eps * lp_norm(d, dual_exponent(p))
    return slack > 1e-9 * max(1.0, float(np.linalg.norm(y)))


def solve_bpdn(A, y, p: float, epsilon: float, cfg: SolverConfig | None = None) -> SolveResult:
    """Minimise ``||z||_1`` subject to ``||A z - y||_p <= epsilon``.

    The returned estimate is the lowest-objective iterate that was feasible to
    ``cfg.tol_feas * max(1, epsilon)``; without one, the last iterate is
    returned and the status is ``max_iters`` (or ``infeasible_detected`` if a
    Farkas certificate was found).
    """
    cfg = cfg or SolverConfig()
    A = as_matrix(A)
    y = as_vector(y, "y")
    p = _check_p(p)
    m, n = A.shape
    if y.size != m:
        raise InvalidParameterError(f"dimension mismatch: A is {m}x{n}, y has length {y.size}")
    if not epsilon >= 0 or math.isinf(epsilon):
        raise InvalidParameterError(f"epsilon must be finite and >= 0, got {epsilon}")
    # never looser than tol_feas * max(1, eps), and proportional to the data when
    # it is small, so that (cA, cy, c eps) is solved to the same relative accuracy
    y_size = lp_norm(y, p)
    feas_tol = cfg.tol_feas * min(max(1.0, epsilon), max(epsilon, y_size))

    if y_size <= epsilon:
        return SolveResult(np.zeros(n), CONVERGED, 0, 0.0, 0.0, 0.0)

    # Normalise: operator norm 1 and ||y||_2 = 1. z = b * z' with b = ||y||_2 / L.
    L = operator_norm(A, cfg.operator_norm_iters)
    if L == 0.0:
        res = SolveResult(np.zeros(n), INFEASIBLE, 0, lp_norm(y, p) - epsilon, 0.0)
        return res
    ynorm = float(np.linalg.norm(y))
    b = ynorm / L
    An = A / L
    yn = y / ynorm
    en = epsilon / ynorm
    p_dual = dual_exponent(p)

    def prox_dual(v, s):
        return v - s * project_lp_ball(v / s, p, en, yn)

    adaptive = cfg.primal_step is None and cfg.dual_step is None
    if adaptive:
        # Primal weight omega sets tau = 0.98/omega, sigma = 0.98*omega; it starts at
        # ||grad of objective||_2 / ||y_n||_2 and is rebalanced at every restart.
        omega = math.sqrt(n)
        tau, sigma = _STEP_SAFETY / omega, _STEP_SAFETY * omega
    else:
        tau, sigma = cfg.steps()

    def measure(zn, wn, Azn):
        """Objective, feasibility, dual bound (original units) and KKT error (normalised)."""
        x = b * zn
        obj = float(np.abs(x).sum())
        rn = lp_norm(Azn - yn, p) - en
        feas = max(0.0, b * L * rn)  # ||A x - y||_p - eps = (||y||_2) * (normalised excess)
        g = float(np.abs(An.T @ wn).max())
        dual_raw = -float(wn @ yn) - en * lp_norm(wn, p_dual)
        dual = b * dual_raw / max(1.0, g)
        kkt = math.sqrt(max(0.0, rn) ** 2 + max(0.0, g - 1.0) ** 2 + (obj / b - dual_raw) ** 2)
        return x, obj, feas, dual, kkt

    z = np.zeros(n)
    w = np.zeros(m)
    Az = np.zeros(m)
    z_sum, w_sum, n_avg = np.zeros(n), np.zeros(m), 0
    z_last, w_last = z.copy(), w.copy()
    kkt_restart = measure(z, w, Az)[4]
    kkt_prev = math.inf
    restarts = 0

    best = None
    best_obj = math.inf
    best_dual = -math.inf
    history: list[float] = []
    diagnostics: list[dict] = []
    status = MAX_ITERS
    w_window = np.zeros(m)
    checks_per_window = cfg.window // cfg.check_every
    k = 0
    for k in range(1, cfg.max_iters + 1):
        z_new = soft_threshold(z - tau * (An.T @ w), tau)
        Az_new = An @ z_new
        w = prox_dual(w + sigma * (2.0 * Az_new - Az), sigma)
        z, Az = z_new, Az_new
        z_sum += z
        w_sum += w
        n_avg += 1
        if k % cfg.check_every and k != cfg.max_iters:
            continue

        z_avg, w_avg = z_sum / n_avg, w_sum / n_avg
        Az_avg = An @ z_avg
        cands = [(z, w, Az), (z_avg, w_avg, Az_avg)]
        kkts = []
        for zc, wc, Azc in cands:
            x, obj, feas, dual, kkt = measure(zc, wc, Azc)
            best_dual = max(best_dual, dual)
            if feas <= feas_tol and obj < best_obj:
                best, best_obj = x, obj
            kkts.append(kkt)
        j = int(np.argmin(kkts))
        kkt_c = kkts[j]
        history.append(best_obj)
        if len(history) % checks_per_window == 0:
            diagnostics.append({
                "iteration": k, "feasibility": measure(z, w, Az)[2], "objective": float(np.abs(b * z).sum()),
                "best_objective": best_obj, "dual_bound": best_dual, "restarts": restarts,
            })
            w_window = w.copy()

        stalled = (
            len(history) > checks_per_window
            and abs(best_obj - history[-1 - checks_per_window]) <= cfg.tol_obj * max(best_obj, 1e-300)
        )
        gap = (best_obj - best_dual) / max(abs(best_obj), abs(best_dual), 1e-300)
        if best is not None and stalled and gap <= cfg.tol_gap:
            status = CONVERGED
            break

        # Adaptive restart from the better of the current and averaged iterates.
        if (kkt_c <= _RESTART_SUFFICIENT * kkt_restart
                or (kkt_c <= _RESTART_NECESSARY * kkt_restart and kkt_c > kkt_prev)
                or n_avg >= _RESTART_ARTIFICIAL * k):
            z, w, Az = (a.copy() for a in cands[j])
            if adaptive:
                dz = float(np.linalg.norm(z - z_last))
                dw = float(np.linalg.norm(w - w_last))
                if dz > 0.0 and dw > 0.0:
                    omega = math.exp(0.5 * math.log(dw / dz) + 0.5 * math.log(omega))
                    tau, sigma = _STEP_SAFETY / omega, _STEP_SAFETY * omega
            z_last, w_last = z.copy(), w.copy()
            z_sum[:], w_sum[:], n_avg = 0.0, 0.0, 0
            kkt_restart, kkt_prev = kkt_c, math.inf
            restarts += 1
        else:
            kkt_prev = kkt_c

    if best is None:
        best = b * z
        # diverging dual direction, or the part of y outside range(A)
        if any(_farkas_certificate(A, y, epsilon, p, d) for d in (w - w_window, w, y)):
            status = INFEASIBLE
        else:
            status = MAX_ITERS
    feas = max(0.0, lp_norm(A @ best - y, p) - epsilon)
    return SolveResult(
        estimate=best,
        status=status,
        iterations=k,
        feasibility_residual=feas,
        objective=float(np.abs(best).sum()),
        dual_bound=best_dual,
        diagnostics=diagnostics,
    )


def solve_bpdn_inf_via_logm(A, y, epsilon: float, cfg: SolverConfig | None = None) -> SolveResult:
    """``l_inf`` program approached through ``p = log m`` with radius ``e * epsilon``.

    Since ``||v||_inf <= ||v||_{log m} <= e ||v||_inf`` for ``v`` in R^m, the
    result is feasible for the ``l_inf`` ball of radius ``e * epsilon``.
    """
    A = as_matrix(A)
    m = A.shape[0]
    if m < 3:
        raise InvalidParameterError(f"need m >= 3 so that log m > 1, got m={m}")
    return solve_bpdn(A, y, math.log(m), math.e * epsilon, cfg)
