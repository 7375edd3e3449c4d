"""End-to-end exit criteria, each at its stated tolerance.

Every criterion records a PASS/FAIL line through the ``criterion`` fixture;
the lines are repeated in the terminal summary. Criteria known not to hold for
a stated reason are marked ``xfail(strict=True)``: they still run and assert
the full criterion, and an unexpected pass fails the suite.
"""

import itertools
import math
import time

import numpy as np
import pytest

from oracles import bpdn_lp
from sparserec.analysis import (
    certify_nsp_q1,
    gaussian_width_bound,
    pipeline_check_theorem3,
    rademacher_sup_estimate,
    rip11_gap_demo,
)
from sparserec.core import ConeParams, cone_membership, dsq_norm, lp_norm
from sparserec.ensembles import (
    KINDS,
    EnsembleSpec,
    heavy_tail_moment,
    heavy_tail_pdf,
    quadrature_moment,
    rng_stream,
    sample_matrix,
)
from sparserec.harness import (
    ExperimentConfig,
    SignalSpec,
    generate_signal,
    noise_scaling_sweep,
    optimal_m,
    phase_grid,
    run_experiment,
    write_csv,
)
from sparserec.prox import project_lp_ball
from sparserec.quantize import quantize, solve_qcbp
from sparserec.solvers import solve_bpdn

pytestmark = pytest.mark.acceptance

N, S = 64, 2
M_OPT = optimal_m(N, S)  # 36


def _recovery_rate(kind: str, p: float, trials: int = 100, gamma=None) -> float:
    cfg = ExperimentConfig(ensemble=EnsembleSpec(kind, 1, N, gamma=gamma), signal=SignalSpec(N, S),
                           m_values=(M_OPT,), trials=trials, p=p)
    return phase_grid(cfg, [M_OPT], [S])[0].rate


# -- 1 ------------------------------------------------------------------------

def test_c1_solver_vs_lp_oracle(criterion):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, unconverged = 0.0, 0
    for k in range(50):
        p = 1.0 if k % 2 == 0 else math.inf
        n = int(rng.integers(2, 13))
        m = int(rng.integers(1, 9))
        A = rng.standard_normal((m, n))
        x = np.zeros(n)
        x[rng.choice(n, min(2, n), replace=False)] = rng.standard_normal(min(2, n))
        eps = float(rng.uniform(0.0, 0.5))
        e = rng.standard_normal(m)
        y = A @ x + 0.5 * eps * e / lp_norm(e, p)
        status, _, opt = bpdn_lp(A, y, p, eps)
        assert status == "optimal"
        res = solve_bpdn(A, y, p, eps)
        unconverged += not res.converged
        worst = max(worst, abs(res.objective - opt))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed < 60
    assert criterion("C1", ok, f"max |obj - LP| = {worst:.2e} over 50 instances "
                               f"({unconverged} unconverged), {elapsed:.1f}s")


# -- 2 ------------------------------------------------------------------------

def test_c2_exact_recovery_all_p(criterion):
    start = time.perf_counter()
    rates = {p: _recovery_rate("gaussian", p) for p in (1.0, 2.0, math.inf)}
    elapsed = time.perf_counter() - start
    ok = min(rates.values()) >= 0.95 and elapsed < 300
    detail = ", ".join(f"p={p:g}: {r:.2f}" for p, r in rates.items())
    assert criterion("C2", ok, f"success at m={M_OPT}: {detail}, {elapsed:.1f}s")


# -- 3 ------------------------------------------------------------------------

def _chain(m: int, taus, draws: int = 20):
    """Certified draws and recovery counterexamples for the NSP => recovery chain."""
    n, s, rho = 10, 2, 0.5
    certified, failures = 0, 0
    for seed in range(draws):
        A = sample_matrix(EnsembleSpec("gaussian", m, n, seed))
        if not any(certify_nsp_q1(A, s, rho, tau, p=1.0).verdict == "certified" for tau in taus):
            continue
        certified += 1
        for supp in itertools.combinations(range(n), s):
            for sg in itertools.product((1.0, -1.0), repeat=s):
                x = np.zeros(n)
                x[list(supp)] = sg
                est = solve_bpdn(A, A @ x, 1.0, 0.0).estimate
                failures += np.linalg.norm(est - x) > 1e-6
    return certified, failures


def test_c3_nsp_implies_recovery(criterion):
    taus = (1.0, 4.0, 16.0, 64.0)
    certified, failures = _chain(8, taus)
    # the stated sizes certify nothing (kernel vectors refute every draw), so
    # the same chain is also run one row higher where certificates do occur
    extra_cert, extra_fail = _chain(10, taus)
    ok = failures == 0 and extra_fail == 0
    note = " (vacuous)" if certified == 0 else ""
    assert criterion("C3", ok, f"m=8: {certified}/20 certified{note}, {failures} counterexamples; "
                               f"m=10: {extra_cert}/20 certified, {extra_fail} counterexamples")


# -- 4 ------------------------------------------------------------------------

def _cone_member(rng, n: int, cp: ConeParams) -> np.ndarray:
    """Random cone member; half of them are pushed onto the cone boundary."""
    while True:
        x = np.zeros(n)
        head = rng.standard_normal(cp.s) * rng.uniform(1, 3)
        head = np.sign(head) * (np.abs(head) + 1.0)
        tail = rng.standard_normal(n - cp.s) * rng.exponential(1, n - cp.s)
        x[: cp.s] = head
        x[cp.s:] = tail
        if rng.random() < 0.5:
            # scale the tail so the defining inequality is (nearly) tight
            need = lp_norm(head, cp.q) * cp.s ** (1 - 1 / cp.q) / cp.rho
            have = np.abs(tail).sum()
            if have > 0:
                x[cp.s:] *= need / have * (1 - 1e-12)
        else:
            x[cp.s:] *= rng.uniform(0, 1)
        x = rng.permutation(x)
        if np.any(x) and cone_membership(x, cp)[0]:
            return x / lp_norm(x, cp.q) * rng.uniform(0.5, 1.0) ** 0.1


def test_c4_cone_inclusion(criterion):
    rng = np.random.default_rng(4)
    violations, worst_ratio = 0, 0.0
    for _ in range(10**4):
        cp = ConeParams(float(rng.uniform(0.05, 0.95)), int(rng.integers(1, 6)), float(rng.choice([1.0, 1.5, 2.0, 3.0, 5.0])))
        n = int(rng.integers(cp.s + 1, 40))
        x = _cone_member(rng, n, cp)
        bound = 2 + 1 / cp.rho
        v = dsq_norm(x, cp.s, cp.q)
        violations += v > bound + 1e-9
        worst_ratio = max(worst_ratio, v / bound)
    assert criterion("C4", violations == 0,
                     f"{violations} violations in 10^4 members, max dsq/(2+1/rho) = {worst_ratio:.3f}")


# -- 5 ------------------------------------------------------------------------

def test_c5_rip_gap(criterion):
    ratios = {s: rip11_gap_demo(400, s, trials=200, seed=s).value for s in (4, 16, 64)}
    within = all(abs(r - math.sqrt(s)) <= 0.1 * math.sqrt(s) for s, r in ratios.items())
    recovery = _recovery_rate("gaussian", 1.0)
    detail = ", ".join(f"s={s}: {r:.3f} (sqrt {math.sqrt(s):g})" for s, r in ratios.items())
    assert criterion("C5", within and recovery >= 0.95, f"{detail}; l1 recovery on the same ensemble {recovery:.2f}")


# -- 6 ------------------------------------------------------------------------

def _sweep(p: float, rule: str):
    cfg = ExperimentConfig(ensemble=EnsembleSpec("gaussian", 1, N), signal=SignalSpec(N, S),
                           m_values=(32, 64, 128, 256), trials=100, p=p,
                           epsilon_rule=rule, epsilon=0.1, base_seed=6)
    return noise_scaling_sweep(cfg)


@pytest.mark.xfail(strict=True, reason="isotropic noise: the error decays like m**(-1/p - 1/2), "
                                       "not m**(-1/p); see the noise_aligned diagnostic")
def test_c6_noise_scaling(criterion):
    reps = {p: _sweep(p, "noise_scaled") for p in (1.0, 2.0)}
    ok = all(abs(r.slope - r.expected) <= 0.3 for r in reps.values())
    aligned = {p: _sweep(p, "noise_aligned").slope for p in (1.0, 2.0)}
    detail = ", ".join(f"p={p:g}: slope {r.slope:.2f} [{r.ci_low:.2f}, {r.ci_high:.2f}] vs {r.expected:.2f}"
                       for p, r in reps.items())
    diag = ", ".join(f"p={p:g}: {s:.2f}" for p, s in aligned.items())
    assert criterion("C6", ok, f"{detail}; aligned-noise slopes {diag}")


# -- 7 ------------------------------------------------------------------------

def test_c7_quantization(criterion):
    medians, feasible, converged, consistent = {}, 0, 0, 0
    for theta in (0.05, 0.2, 0.8):
        errs = []
        for seed in range(100):
            A = sample_matrix(EnsembleSpec("gaussian", M_OPT, N, seed))
            x = generate_signal(SignalSpec(N, S), rng_stream(seed, 1))
            y = quantize(A @ x, theta)
            res, ok = solve_qcbp(A, y, theta)
            errs.append(np.linalg.norm(res.estimate - x))
            consistent += ok
            if res.converged:
                converged += 1
                feasible += lp_norm(A @ res.estimate - y, math.inf) <= theta / 2 + 1e-8
        medians[theta] = float(np.median(errs)) / theta
    spread = max(medians.values()) / min(medians.values())
    ok = spread <= 3 and feasible == converged
    detail = ", ".join(f"theta={t:g}: {v:.3f}" for t, v in medians.items())
    assert criterion("C7", ok, f"median err/theta {detail} (spread {spread:.2f}); closed-box feasible "
                               f"{feasible}/{converged} converged of 300; consistent {consistent}/300")


# -- 8 ------------------------------------------------------------------------

def test_c8_ensembles(criterion):
    pairs = [(g, p) for g in (4.0, 5.0, 6.0, 7.0, 10.0) for p in (1.0, 1.5, 2.0, 2.5)]
    worst_rel = max(abs(heavy_tail_moment(g, p) / quadrature_moment(lambda t, g=g: heavy_tail_pdf(t, g), p) - 1)
                    for g, p in pairs)

    g = 6.0
    a = sample_matrix(EnsembleSpec("heavy_tail", 1000, 1000, seed=8, gamma=g)).ravel()
    z = []
    for k in (2, 4):
        v = a**k
        z.append(abs(v.mean() - heavy_tail_moment(g, k)) / (v.std() / math.sqrt(v.size)))

    gamma = max(math.ceil(math.log(N)) + 2, 6)
    rates = {}
    for kind in KINDS:
        rates[kind] = min(_recovery_rate(kind, p, gamma=gamma if kind == "heavy_tail" else None)
                          for p in (1.0, 2.0, math.inf))
    ok = worst_rel <= 1e-6 and max(z) <= 3 and min(rates.values()) >= 0.90
    detail = ", ".join(f"{k}: {r:.2f}" for k, r in rates.items())
    assert criterion("C8", ok, f"max moment rel. err {worst_rel:.1e} over 20 pairs; gamma=6 moment z-scores "
                               f"{z[0]:.2f}, {z[1]:.2f}; min success over p (gamma={gamma}): {detail}")


# -- 9 ------------------------------------------------------------------------

def test_c9_width(criterion):
    parts = []
    ok = True
    for n, s in ((64, 2), (256, 8)):
        est = rademacher_sup_estimate(EnsembleSpec("gaussian", 1, n), 64, s, trials=400, seed=9)
        w = gaussian_width_bound(n, s)
        ok &= est.value <= w + est.half_width
        parts.append(f"(n={n}, s={s}): sup {est.value:.3f} +- {est.half_width:.3f} <= width {w:.3f}")
    assert criterion("C9", ok, "; ".join(parts))


def test_c9_pipeline_monotone(criterion):
    ms = [1, 10, 100, 10**3, 10**4, 10**5, 10**6]
    reps = [pipeline_check_theorem3(64, 2, 2.0, 0.5, m, seed=9) for m in ms]
    flags = [r.positive for r in reps]
    ok = all(not a or b for a, b in zip(flags, flags[1:]))
    first = next((m for m, f in zip(ms, flags) if f), None)
    assert criterion("C9", ok, f"positivity monotone over m in {ms} (first positive at m={first})")


@pytest.mark.xfail(strict=True, reason="the composed small-ball bound is still negative at m = 10^4; "
                                       "it turns positive near m = 1.1e5")
def test_c9_pipeline_positive(criterion):
    rep = pipeline_check_theorem3(64, 2, 2.0, 0.5, 10**4, seed=9)
    assert criterion("C9", rep.positive,
                     f"bound at m=10^4 = {rep.lower_bound:.4f} (R_m {rep.rademacher_complexity:.3f}, "
                     f"u* {rep.u_star:.3f}, Q(2u*) {rep.small_ball:.3f})")


# -- 10 -----------------------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0, math.inf])
def test_c10_projection_properties(criterion, p):
    rng = np.random.default_rng(10)
    bad = {"feasibility": 0, "idempotence": 0, "nonexpansive": 0, "optimality": 0}
    for _ in range(10**4):
        n = int(rng.integers(1, 12))
        scale = 10.0 ** rng.uniform(-3, 3)
        x, z = rng.standard_normal((2, n)) * scale
        c = rng.standard_normal(n) * scale * rng.integers(0, 2)
        r = rng.uniform(0, 2) * scale
        u = project_lp_ball(x, p, r, c)
        bad["feasibility"] += lp_norm(u - c, p) > r * (1 + 1e-12) + 1e-300
        uu = project_lp_ball(u, p, r, c)
        bad["idempotence"] += not np.allclose(uu, u, rtol=1e-10, atol=1e-12 * scale)
        v = project_lp_ball(z, p, r, c)
        bad["nonexpansive"] += np.linalg.norm(u - v) > np.linalg.norm(x - z) * (1 + 1e-10) + 1e-12 * scale
        f = rng.standard_normal(n)
        f = c + f * (r / max(lp_norm(f, p), 1e-300)) * rng.uniform()
        bad["optimality"] += (x - u) @ (f - u) > 1e-8 * scale**2
    total = sum(bad.values())
    assert criterion("C10", total == 0, f"p={p:g}: {total} violations in 10^4 cases")


# -- 11 -----------------------------------------------------------------------

def test_c11_determinism(criterion, tmp_path):
    configs = [
        ExperimentConfig(ensemble=EnsembleSpec("gaussian", 1, N), signal=SignalSpec(N, S),
                         m_values=(24, 36, 48), trials=8, p=2.0, epsilon_rule="noise_scaled",
                         epsilon=0.05, base_seed=11),
        ExperimentConfig(ensemble=EnsembleSpec("heavy_tail", 1, 32, gamma=7.0),
                         signal=SignalSpec(32, 3, "compressible"), m_values=(20,), trials=10,
                         p=math.inf, q=1.5, epsilon_rule="quantizer", epsilon=0.1, base_seed=2**64 - 1),
    ]
    same = True
    for i, cfg in enumerate(configs):
        outs = []
        for run, threads in enumerate((1, 1, 8)):
            path = tmp_path / f"c{i}_{run}.csv"
            write_csv(run_experiment(cfg, threads=threads), path)
            outs.append(path.read_bytes())
        same &= outs[0] == outs[1] == outs[2]
    assert criterion("C11", same, "CSV bytes identical across repeat runs and 1 vs 8 threads for 2 configs")
