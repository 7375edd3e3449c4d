"""Certificates and Monte Carlo estimators for recovery conditions.

Covers the robust null space property (exact-style certification for
``q = 1``), the restricted infimum of ``||Ax||_p`` over the sparse-dominated
cone, ``RIP_{p,q}`` constants, the small-ball method ingredients and a
transcript of the small-ball argument for Gaussian matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import special, stats

from .core import (
    ConeParams,
    InvalidParameterError,
    as_matrix,
    as_vector,
    cone_membership,
    lp_norm,
)
from .ensembles import EnsembleSpec, rng_stream, sample_rows
from .prox import _check_p, dual_exponent, project_columns
from .solvers import operator_norm, pdhg

__all__ = [
    "MCEstimate",
    "NspCertificate",
    "RipEstimate",
    "ConeInfimum",
    "KomBound",
    "PipelineReport",
    "MAX_NSP_SUBPROBLEMS",
    "nsp_constants",
    "nsp_error_bound",
    "certify_nsp_q1",
    "cone_infimum_estimate",
    "rip_pq_estimate",
    "rip11_gap_demo",
    "small_ball_estimate",
    "top_s_l2",
    "rademacher_sup_estimate",
    "gaussian_width_bound",
    "kom13_lower_bound",
    "pipeline_check_theorem3",
]

MAX_NSP_SUBPROBLEMS = 10**6

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


class MCEstimate(NamedTuple):
    """Monte Carlo point estimate with a 95% confidence half-width."""

    value: float
    half_width: float
    samples: int


# -- null space property ----------------------------------------------------

def nsp_constants(rho: float) -> tuple[float, float]:
    """``(C_rho, D_rho) = ((1+rho)**2/(1-rho), (3+rho)/(1-rho))``."""
    return (1.0 + rho) ** 2 / (1.0 - rho), (3.0 + rho) / (1.0 - rho)


def nsp_error_bound(sigma_s: float, eps: float, rho: float, tau: float, s: int, r: float = 1.0, q: float = 1.0) -> float:
    """Error bound in ``l_r`` implied by the ``l_q``-robust NSP with ``(rho, tau)``."""
    C, D = nsp_constants(rho)
    return C * s ** (1.0 / r - 1.0) * sigma_s + tau * D * s ** (1.0 / r - 1.0 / q) * eps


@dataclass
class NspCertificate:
    """Outcome of :func:`certify_nsp_q1`.

    Margins are ``1 - min{rho ||x_{S^c}||_1 + tau_eff ||Ax||_p : sigma^T x_S = 1}``
    per support/sign pair; the property holds iff every margin is ``<= 0``.
    ``certified`` means every margin is provably at most ``tolerance``;
    ``refuted`` means some margin provably exceeds it.
    ``witness`` (refuted only) is normalised by ``sigma^T x_S = 1``.
    """

    q: float
    s: int
    rho: float
    tau: float
    norm_p: float
    verdict: str
    worst_margin: float
    witness: np.ndarray | None
    tolerance: float
    tau_effective: float = math.nan
    reason: str = ""
    iterations: int = 0
    supports: list[tuple[int, ...]] = field(default_factory=list)
    signs: list[tuple[int, ...]] = field(default_factory=list)
    margins: np.ndarray | None = None  # (n_supports, n_signs) decisive margin bounds

    def detail_rows(self):
        """``(support_id, sign_id, margin)`` rows for CSV output."""
        if self.margins is None:
            return []
        return [
            (i, j, float(self.margins[i, j]))
            for i in range(self.margins.shape[0])
            for j in range(self.margins.shape[1])
        ]


def certify_nsp_q1(
    A,
    s: int,
    rho: float,
    tau: float,
    p: float = 2.0,
    tol: float = 1e-6,
    scale_by_m: bool = True,
    max_iters: int = 50000,
    check_every: int = 20,
    refine: bool = False,
) -> NspCertificate:
    """Decide the ``l_1``-robust null space property of order ``s``.

    For every support ``|S| = s`` and sign pattern ``sigma`` the convex program
    ``min rho ||x_{S^c}||_1 + tau_eff ||Ax||_p  s.t.  sigma^T x_S = 1`` is solved by
    PDHG (all pairs batched as columns). ``tau_eff = tau / m**(1/p)`` unless
    ``scale_by_m`` is false. Primal iterates give refuting witnesses; dual
    iterates, corrected to exact dual feasibility, give certified lower bounds.
    With ``refine`` every refuted margin is also pinned down to within ``tol``;
    otherwise a column stops as soon as its sign is decided.
    """
    A = as_matrix(A)
    m, n = A.shape
    p = _check_p(p)
    if int(s) != s or not 1 <= s <= n:
        raise InvalidParameterError(f"s must be an integer in [1, {n}], got {s}")
    if not 0 < rho < 1 or not tau > 0 or not tol > 0:
        raise InvalidParameterError("need 0 < rho < 1, tau > 0 and tol > 0")
    tau_eff = tau / m ** (1.0 / p) if scale_by_m else tau
    cert = NspCertificate(q=1.0, s=s, rho=rho, tau=tau, norm_p=p, verdict=INCONCLUSIVE,
                          worst_margin=math.nan, witness=None, tolerance=tol, tau_effective=tau_eff)
    n_problems = math.comb(n, s) * 2**s
    if n_problems > MAX_NSP_SUBPROBLEMS:
        cert.reason = f"{n_problems} subproblems exceed the enumeration guard {MAX_NSP_SUBPROBLEMS}"
        return cert

    supports = list(itertools.combinations(range(n), s))
    signs = list(itertools.product((1, -1), repeat=s))
    cert.supports, cert.signs = supports, signs
    n_sup, n_sig = len(supports), len(signs)
    K = n_sup * n_sig
    sup_idx = np.repeat(np.array(supports, dtype=int), n_sig, axis=0)  # (K, s)
    sig_val = np.tile(np.array(signs, dtype=float), (n_sup, 1))  # (K, s)
    cols = np.arange(K)

    mask = np.zeros((n, K), dtype=bool)
    mask[sup_idx.T, cols] = True
    Sig = np.zeros((n, K))
    Sig[sup_idx.T, cols] = sig_val.T

    # Corrections for exact dual feasibility: delta = A_S (A_S^T A_S)^{-1} r.
    corr = np.zeros((n_sup, m, s))
    rank_ok = np.zeros(n_sup, dtype=bool)
    for i, S in enumerate(supports):
        AS = A[:, S]
        G = AS.T @ AS
        if np.linalg.matrix_rank(AS) == s:
            corr[i] = AS @ np.linalg.inv(G)
            rank_ok[i] = True
    sup_of_col = np.repeat(np.arange(n_sup), n_sig)

    p_dual = dual_exponent(p)
    L = operator_norm(A)
    if L == 0.0:
        # Ax = 0: margin of sigma/s-type vectors is exactly 1.
        x = np.zeros(n)
        x[0] = 1.0
        cert.verdict, cert.worst_margin, cert.witness = REFUTED, 1.0, x
        cert.margins = np.ones((n_sup, n_sig))
        return cert
    step = 0.98 / L

    def value(X, active):
        tail = np.where(mask[:, active], 0.0, np.abs(X)).sum(axis=0)
        AX = A @ X
        if math.isinf(p):
            ax = np.abs(AX).max(axis=0)
        elif p == 1.0:
            ax = np.abs(AX).sum(axis=0)
        else:
            ax = np.array([lp_norm(AX[:, j], p) for j in range(AX.shape[1])]) if p != 2.0 else np.linalg.norm(AX, axis=0)
        return rho * tail + tau_eff * ax

    def dual_value(W, active):
        G = A.T @ W
        a = G[sup_idx[active].T, np.arange(len(active))]  # (s, k)
        sg = sig_val[active].T
        c0 = (sg * a).sum(axis=0) / s
        r = c0 * sg - a
        delta = np.einsum("kms,sk->mk", corr[sup_of_col[active]], r)
        W2 = W + delta
        G2 = A.T @ W2
        tail = np.where(mask[:, active], 0.0, np.abs(G2)).max(axis=0)
        wn = np.array([lp_norm(W2[:, j], p_dual) for j in range(W2.shape[1])]) \
            if p_dual not in (1.0, 2.0, math.inf) else _column_norms(W2, p_dual)
        kappa = np.minimum(1.0, np.minimum(tau_eff / np.maximum(wn, 1e-300), rho / np.maximum(tail, 1e-300)))
        lo = np.maximum(0.0, kappa * c0)
        return np.where(rank_ok[sup_of_col[active]], lo, 0.0)

    margins_lo = np.full(K, -math.inf)  # 1 - upper bound of min value
    margins_hi = np.full(K, math.inf)   # 1 - lower bound of min value
    witnesses = np.zeros((n, K))
    active = np.arange(K)
    X = Sig / s
    W = np.zeros((m, K))

    def make_prox_primal(mk, sg):
        def prox(V, t):
            soft = np.sign(V) * np.maximum(np.abs(V) - t * rho, 0.0)
            shift = ((sg * V).sum(axis=0) - 1.0) / s
            return np.where(mk, V - shift * sg, soft)
        return prox

    def prox_dual(V, sgm):
        return project_columns(V, p_dual, tau_eff)

    total_iters = 0
    while active.size and total_iters < max_iters:
        it = pdhg(A, make_prox_primal(mask[:, active], Sig[:, active]), prox_dual, X, W, step, step)
        for _ in range(check_every):
            X, W, _ = next(it)
        total_iters += check_every
        up = value(X, active)
        lo = dual_value(W, active)
        margins_lo[active] = np.maximum(margins_lo[active], 1.0 - up)
        better = (1.0 - up) >= margins_lo[active]
        witnesses[:, active[better]] = X[:, better]
        margins_hi[active] = np.minimum(margins_hi[active], 1.0 - lo)
        decided = (margins_hi[active] <= tol) | (margins_hi[active] - margins_lo[active] <= tol)
        if not refine:
            decided |= margins_lo[active] > tol
        keep = ~decided
        active, X, W = active[keep], X[:, keep], W[:, keep]
    cert.iterations = total_iters

    if np.any(margins_lo > tol):
        j = int(np.argmax(margins_lo))
        cert.verdict = REFUTED
        cert.worst_margin = float(margins_lo[j])
        cert.witness = witnesses[:, j].copy()
        cert.margins = margins_lo.reshape(n_sup, n_sig)
    elif np.all(margins_hi <= tol):
        cert.verdict = CERTIFIED
        cert.worst_margin = float(margins_hi.max())
        cert.margins = margins_hi.reshape(n_sup, n_sig)
    else:
        cert.verdict = INCONCLUSIVE
        cert.worst_margin = float(margins_lo.max())
        cert.margins = margins_lo.reshape(n_sup, n_sig)
        cert.reason = "iteration limit reached"
    return cert


def _column_norms(V: np.ndarray, p: float) -> np.ndarray:
    if math.isinf(p):
        return np.abs(V).max(axis=0)
    if p == 1.0:
        return np.abs(V).sum(axis=0)
    return np.linalg.norm(V, axis=0)


# -- cone infimum -----------------------------------------------------------

@dataclass
class ConeInfimum:
    value: float
    witness: np.ndarray
    start_values: np.ndarray


def _lp_subgradient(v: np.ndarray, p: float) -> np.ndarray:
    if math.isinf(p):
        g = np.zeros_like(v)
        j = int(np.argmax(np.abs(v)))
        g[j] = np.sign(v[j])
        return g
    if p == 1.0:
        return np.sign(v)
    nrm = lp_norm(v, p)
    if nrm == 0.0:
        return np.zeros_like(v)
    return np.sign(v) * (np.abs(v) / nrm) ** (p - 1.0)


def _sparse_start(rng, n, s, q):
    x = np.zeros(n)
    x[rng.choice(n, s, replace=False)] = rng.standard_normal(s)
    return x / lp_norm(x, q)


def _near_sparse_start(rng, n, cp: ConeParams):
    x = _sparse_start(rng, n, cp.s, cp.q)
    tail = rng.standard_normal(n) * (x == 0)
    scale = rng.uniform(0.05, 1.0)
    for _ in range(60):
        z = x + scale * tail
        if cone_membership(z, cp)[0]:
            return z / lp_norm(z, cp.q)
        scale /= 2
    return x


def cone_infimum_estimate(
    A,
    cp: ConeParams,
    p: float = 2.0,
    restarts: int = 10,
    seed: int = 0,
    starts: str = "full",
    max_steps: int = 300,
) -> ConeInfimum:
    """Multi-start local search for ``inf ||Ax||_p`` over the cone intersected
    with the unit ``l_q`` sphere.

    The result is an upper bound on the infimum. ``starts="sparse"`` uses
    ``restarts`` random ``s``-sparse starts; ``"full"`` adds as many near-sparse
    cone members drawn from an independent stream, so its value never exceeds the
    sparse-only value for the same seed.
    """
    A = as_matrix(A)
    m, n = A.shape
    p = _check_p(p)
    cp.validate_dimension(n)
    if restarts < 1:
        raise InvalidParameterError("restarts must be >= 1")
    if starts not in ("sparse", "full"):
        raise InvalidParameterError(f"starts must be 'sparse' or 'full', got {starts!r}")
    rng_sparse = rng_stream(seed, 1)
    points = [_sparse_start(rng_sparse, n, cp.s, cp.q) for _ in range(restarts)]
    if starts == "full":
        rng_near = rng_stream(seed, 2)
        points += [_near_sparse_start(rng_near, n, cp) for _ in range(restarts)]

    def f(x):
        return lp_norm(A @ x, p)

    start_values = np.array([f(x) for x in points])
    best_val, best_x = math.inf, None
    for x in points:
        fx = f(x)
        eta = 0.5
        for _ in range(max_steps):
            g = A.T @ _lp_subgradient(A @ x, p)
            gn = np.linalg.norm(g)
            if gn == 0.0 or eta < 1e-12:
                break
            cand = x - eta * g / gn
            cn = lp_norm(cand, cp.q)
            if cn == 0.0:
                eta /= 2
                continue
            cand = cand / cn
            fc = f(cand)
            if fc < fx and cone_membership(cand, cp)[0]:
                x, fx = cand, fc
                eta *= 1.5
            else:
                eta /= 2
        if fx < best_val:
            best_val, best_x = fx, x
    return ConeInfimum(value=float(best_val), witness=best_x, start_values=start_values)


# -- RIP_{p,q} --------------------------------------------------------------

@dataclass
class RipEstimate:
    """Extreme ratios ``||Ax||_p / ||x||_q`` found over tested ``s``-sparse ``x``.

    ``c_lower_est`` is an upper bound on the true lower constant, ``C_upper_est``
    a lower bound on the true upper constant.
    """

    p: float
    q: float
    s: int
    c_lower_est: float
    C_upper_est: float
    samples: int
    method: str
    argmin: np.ndarray | None = None
    argmax: np.ndarray | None = None


def rip_pq_estimate(A, s: int, p: float, q: float, samples: int = 1000, seed: int = 0, refine_steps: int = 100) -> RipEstimate:
    """Estimate ``RIP_{p,q}`` constants on ``s``-sparse vectors.

    Tests ``samples`` random sparse vectors (uniform support, Gaussian entries),
    every ``e_i``, and the flat vectors ``s**(-1/q) 1_S`` on each sampled support;
    then perturbs the extremal vectors on their supports (``refine_steps`` > 0).
    """
    A = as_matrix(A)
    m, n = A.shape
    if samples < 1:
        raise InvalidParameterError("samples must be >= 1")
    if int(s) != s or not 1 <= s <= n:
        raise InvalidParameterError(f"s must be an integer in [1, {n}]")
    rng = rng_stream(seed, 3)

    def ratio(x):
        return lp_norm(A @ x, p) / lp_norm(x, q)

    cands = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cands.append(e)
    first = np.zeros(n)
    first[:s] = s ** (-1.0 / q)
    cands.append(first)
    for _ in range(samples):
        S = rng.choice(n, s, replace=False)
        x = np.zeros(n)
        x[S] = rng.standard_normal(s)
        cands.append(x / lp_norm(x, q))
        flat = np.zeros(n)
        flat[S] = s ** (-1.0 / q)
        cands.append(flat)
    ratios = np.array([ratio(x) for x in cands])
    lo_x, hi_x = cands[int(np.argmin(ratios))], cands[int(np.argmax(ratios))]
    lo, hi = float(ratios.min()), float(ratios.max())

    for _ in range(refine_steps):
        for which in ("lo", "hi"):
            base = lo_x if which == "lo" else hi_x
            supp = np.nonzero(base)[0]
            cand = base.copy()
            cand[supp] += 0.1 * rng.standard_normal(supp.size) * np.abs(base[supp]).max()
            if not np.any(cand):
                continue
            r = ratio(cand)
            if which == "lo" and r < lo:
                lo, lo_x = r, cand / lp_norm(cand, q)
            elif which == "hi" and r > hi:
                hi, hi_x = r, cand / lp_norm(cand, q)
    return RipEstimate(p=p, q=q, s=s, c_lower_est=lo, C_upper_est=hi, samples=len(cands),
                       method="local_search" if refine_steps > 0 else "monte_carlo",
                       argmin=lo_x, argmax=hi_x)


def rip11_gap_demo(m: int, s: int, trials: int = 100, seed: int = 0) -> MCEstimate:
    """Mean of ``||A e_1||_1 / ||A x_flat||_1`` with ``x_flat = (1/s) sum_{i<=s} e_i``.

    Both vectors have unit ``l_1`` norm, yet for Gaussian ``A`` the ratio
    concentrates at ``sqrt(s)``.
    """
    if m < 1 or s < 1 or trials < 1:
        raise InvalidParameterError("m, s and trials must be positive")
    rng = rng_stream(seed, 4)
    vals = np.empty(trials)
    for k in range(trials):
        G = rng.standard_normal((m, s))
        vals[k] = np.abs(G[:, 0]).sum() / np.abs(G.sum(axis=1) / s).sum()
    hw = 1.96 * vals.std(ddof=1) / math.sqrt(trials) if trials > 1 else math.inf
    return MCEstimate(float(vals.mean()), float(hw), trials)


# -- small-ball ingredients -------------------------------------------------

def _draw_rows(spec: EnsembleSpec, count: int, n: int, rng) -> np.ndarray:
    return sample_rows(spec.kind, count, n, rng, spec.gamma)


def small_ball_estimate(spec: EnsembleSpec, x, u, trials: int = 10000, seed: int = 0, chunk: int = 20000):
    """Empirical ``P(|<X, x>| >= u)`` for rows ``X`` of ``spec`` and unit ``x``.

    ``u`` may be an array; all levels are evaluated on the same draws, so the
    estimate is nonincreasing in ``u``. Returns an :class:`MCEstimate` (arrays
    for array ``u``) with a normal-approximation 95% half-width.
    """
    x = as_vector(x)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise InvalidParameterError("x must be nonzero")
    x = x / nx
    us = np.atleast_1d(np.asarray(u, dtype=float))
    rng = rng_stream(seed, 5)
    counts = np.zeros(us.size)
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        proj = np.abs(_draw_rows(spec, k, x.size, rng) @ x)
        counts += (proj[:, None] >= us[None, :]).sum(axis=0)
        done += k
    freq = counts / trials
    hw = 1.96 * np.sqrt(freq * (1 - freq) / trials)
    if np.ndim(u) == 0:
        return MCEstimate(float(freq[0]), float(hw[0]), trials)
    return MCEstimate(freq, hw, trials)


def top_s_l2(v, s: int) -> float:
    """``sup_{x s-sparse, ||x||_2 = 1} <v, x>``: the ``l_2`` norm of the ``s`` largest ``|v_i|``."""
    v = np.sort(np.abs(as_vector(v)))[::-1]
    return float(np.sqrt(np.sum(v[:s] ** 2)))


def rademacher_sup_estimate(spec: EnsembleSpec, m: int, s, trials: int = 200, seed: int = 0) -> MCEstimate:
    """Monte Carlo ``E sup_{x in Sigma_s^2} <V, x>`` with ``V = m**-0.5 sum eps_i X_i``.

    Rows and signs are redrawn every trial; the supremum is evaluated in closed
    form. ``s`` may be an array (same draws for all levels).
    """
    n = spec.n
    ss = np.atleast_1d(np.asarray(s, dtype=int))
    if np.any(ss < 1) or np.any(ss > n):
        raise InvalidParameterError(f"s must lie in [1, {n}]")
    rng = rng_stream(seed, 6)
    vals = np.empty((trials, ss.size))
    for k in range(trials):
        X = _draw_rows(spec, m, n, rng)
        eps = np.where(rng.random(m) < 0.5, -1.0, 1.0)
        V = eps @ X / math.sqrt(m)
        cs = np.cumsum(np.sort(V**2)[::-1])
        vals[k] = np.sqrt(cs[ss - 1])
    mean = vals.mean(axis=0)
    hw = 1.96 * vals.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.full(ss.size, math.inf)
    if np.ndim(s) == 0:
        return MCEstimate(float(mean[0]), float(hw[0]), trials)
    return MCEstimate(mean, hw, trials)


def gaussian_width_bound(n: int, s: int) -> float:
    """Upper bound ``sqrt(2 s log(e n / s)) + sqrt(s)`` on the Gaussian width of
    the ``s``-sparse unit vectors."""
    if not 1 <= s <= n:
        raise InvalidParameterError(f"need 1 <= s <= n, got s={s}, n={n}")
    return math.sqrt(2.0 * s * math.log(math.e * n / s)) + math.sqrt(s)


class KomBound(NamedTuple):
    value: float
    failure_probability: float


def kom13_lower_bound(u: float, p: float, Q2u: float, Rm: float, t: float, m: int) -> KomBound:
    """Small-ball lower bound ``u**p (Q(2u) - 4 R_m / u - t / sqrt(m))`` on
    ``inf_f (1/m) sum |f(X_i)|**p``, holding with probability
    ``1 - failure_probability``, ``failure_probability = 2 exp(-2 t**2)``.
    """
    if not (u > 0 and m >= 1 and p >= 1 and 0 <= Q2u <= 1 and Rm >= 0 and t >= 0):
        raise InvalidParameterError("need u > 0, m >= 1, p >= 1, 0 <= Q2u <= 1, Rm >= 0, t >= 0")
    val = u**p * (Q2u - 4.0 * Rm / u - t / math.sqrt(m))
    return KomBound(float(val), float(min(1.0, 2.0 * math.exp(-2.0 * t * t))))


@dataclass
class PipelineReport:
    n: int
    s: int
    q: float
    rho: float
    m: int
    p: float
    sup_estimate: float
    sup_half_width: float
    width_bound: float
    rademacher_complexity: float
    u_star: float
    small_ball: float
    t: float
    lower_bound: float
    failure_probability: float
    tau: float

    @property
    def positive(self) -> bool:
        return self.lower_bound > 0


def pipeline_check_theorem3(
    n: int,
    s: int,
    q: float,
    rho: float,
    m: int,
    seed: int = 0,
    p: float = 2.0,
    eta: float = 0.1,
    trials: int = 200,
    small_ball_trials: int = 20000,
    small_ball_target: float = 0.5,
    sup_rows: int = 256,
) -> PipelineReport:
    """Evaluate the small-ball lower bound for a standard Gaussian ``m x n`` matrix.

    Composes: Monte Carlo ``E sup <V,x>`` over ``s``-sparse unit vectors, the
    factor ``s**(1/2-1/q) (2 + 1/rho) / sqrt(m)`` giving ``R_m``, ``u_*`` with
    ``P(|g| >= 2 u_*) = small_ball_target``, the empirical small-ball
    probability at ``2 u_*``, ``t`` with ``2 exp(-2t^2) = eta``, and the final
    bound. A positive bound means ``inf ||Ax||_p >= m**(1/p) / tau`` on the cone
    with ``tau = 4**(1/p) / u_*`` at confidence ``1 - eta``.

    For Gaussian rows ``V`` is standard Gaussian whatever ``m``, so the sup is
    estimated with ``sup_rows`` rows; the same draws then serve every ``m`` and
    positivity is monotone in ``m``.
    """
    if q < 2:
        raise InvalidParameterError(f"q must be >= 2, got {q}")
    if not 0 < rho < 1 or not 0 < eta < 1 or m < 1:
        raise InvalidParameterError("need 0 < rho < 1, 0 < eta < 1, m >= 1")
    p = _check_p(p)
    # l_inf is reached through p = log m
    pp = max(1.0, math.log(m)) if math.isinf(p) else p
    spec = EnsembleSpec("gaussian", m=1, n=n)
    sup = rademacher_sup_estimate(spec, sup_rows, s, trials, seed)
    Rm = s ** (0.5 - 1.0 / q) * (2.0 + 1.0 / rho) * sup.value / math.sqrt(m)
    u_star = stats.norm.ppf(1.0 - small_ball_target / 2.0) / 2.0
    e1 = np.zeros(n)
    e1[0] = 1.0
    Q = small_ball_estimate(spec, e1, 2.0 * u_star, small_ball_trials, seed).value
    t = math.sqrt(math.log(2.0 / eta) / 2.0)
    kb = kom13_lower_bound(u_star, pp, Q, Rm, t, m)
    return PipelineReport(
        n=n, s=s, q=q, rho=rho, m=m, p=p,
        sup_estimate=sup.value, sup_half_width=sup.half_width,
        width_bound=gaussian_width_bound(n, s),
        rademacher_complexity=Rm, u_star=float(u_star), small_ball=Q, t=t,
        lower_bound=kb.value, failure_probability=kb.failure_probability,
        tau=float(4.0 ** (1.0 / pp) / u_star),
    )
