"""``sparserec`` command line.

Exit codes: 0 success, 1 invalid input, 2 internal error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..analysis import certify_nsp_q1, pipeline_check_theorem3, rip11_gap_demo, rip_pq_estimate
from ..core import InvalidParameterError, read_matrix, read_vector, write_matrix, write_vector
from ..ensembles import KINDS, EnsembleSpec, sample_matrix
from ..solvers import SolverConfig, solve_bpdn
from .config import parse_config
from .experiment import (
    ExperimentConfig,
    noise_scaling_sweep,
    phase_grid,
    run_experiment,
    write_csv,
    write_rows,
)
from .signals import SignalSpec

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _p_value(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _default_threads() -> int:
    raw = os.environ.get("SPARSEREC_THREADS", "1")
    try:
        return int(raw)
    except ValueError:
        raise _UsageError(f"SPARSEREC_THREADS must be an integer, got {raw!r}") from None


def _solver_config(args) -> SolverConfig:
    kw = {}
    for name in ("max_iters", "tol_feas", "tol_obj"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return SolverConfig(**kw)


def _out(args, name: str) -> Path:
    return Path(args.out_dir) / name


def _fmt(v: float) -> str:
    return repr(float(v))


# -- subcommands --------------------------------------------------------------

def cmd_gen_matrix(args) -> int:
    spec = EnsembleSpec(args.kind, args.m, args.n, args.seed or 0, args.gamma)
    path = Path(args.out) if args.out else _out(args, "A.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_matrix(path, sample_matrix(spec))
    if not spec.meets_tail_condition:
        print(f"note: gamma={spec.gamma} is below max(log n + 2, 6)", file=sys.stderr)
    print(path)
    return EXIT_OK


def cmd_solve(args) -> int:
    A = read_matrix(args.A)
    y = read_vector(args.y)
    res = solve_bpdn(A, y, args.p, args.eps, _solver_config(args))
    path = Path(args.out) if args.out else _out(args, "estimate.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_vector(path, res.estimate)
    print(f"{res.status} {res.iterations} {_fmt(res.objective)} {_fmt(res.feasibility_residual)}")
    return EXIT_OK


def cmd_certify_nsp(args) -> int:
    A = read_matrix(args.A)
    cert = certify_nsp_q1(A, args.s, args.rho, args.tau, args.p, args.tol,
                          scale_by_m=not args.raw_norm, refine=args.refine)
    if cert.margins is not None:
        write_rows(_out(args, "nsp_detail.csv"), ("support_id", "sign_id", "margin"), cert.detail_rows())
    line = f"{cert.verdict} {_fmt(cert.worst_margin)} {_fmt(cert.tau_effective)}"
    if cert.reason:
        line += f" # {cert.reason}"
    print(line)
    return EXIT_OK


def cmd_estimate_rip(args) -> int:
    A = read_matrix(args.A)
    est = rip_pq_estimate(A, args.s, args.p, args.q, args.samples, args.seed or 0)
    print(f"{_fmt(est.c_lower_est)} {_fmt(est.C_upper_est)} {est.samples} {est.method}")
    return EXIT_OK


def cmd_gap_demo(args) -> int:
    est = rip11_gap_demo(args.m, args.s, args.trials, args.seed or 0)
    print(f"{_fmt(est.value)} {_fmt(est.half_width)} {_fmt(math.sqrt(args.s))}")
    return EXIT_OK


def cmd_pipeline_check(args) -> int:
    rep = pipeline_check_theorem3(args.n, args.s, args.q, args.rho, args.m, args.seed or 0, p=args.p)
    verdict = "positive" if rep.positive else "vacuous"
    print(f"{verdict} {_fmt(rep.lower_bound)} {_fmt(rep.rademacher_complexity)} {_fmt(rep.u_star)} "
          f"{_fmt(rep.small_ball)} {_fmt(rep.failure_probability)}")
    return EXIT_OK


def cmd_quantize_demo(args) -> int:
    cfg = ExperimentConfig(
        ensemble=EnsembleSpec("gaussian", args.m, args.n),
        signal=SignalSpec(args.n, args.s),
        m_values=(args.m,), trials=args.trials, p=math.inf,
        epsilon_rule="quantizer", epsilon=args.theta, base_seed=args.seed or 0,
    )
    recs = run_experiment(cfg, args.threads)
    rows = [(r.trial_id, args.theta, r.err_l2, r.err_l1, r.consistent) for r in recs]
    write_rows(_out(args, "quantize_demo.csv"), ("trial", "theta", "err_l2", "err_l1", "consistent"), rows)
    med = float(np.median([r.err_l2 for r in recs]))
    print(f"{_fmt(med)} {sum(bool(r.consistent) for r in recs)}/{len(recs)}")
    return EXIT_OK


def _load(args) -> ExperimentConfig:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    return cfg


def cmd_experiment(args) -> int:
    cfg = _load(args)
    recs = run_experiment(cfg, args.threads, timings=args.timings)
    path = _out(args, args.name)
    write_csv(recs, path)
    print(path)
    return EXIT_OK


def cmd_phase_grid(args) -> int:
    cfg = _load(args)
    cells = phase_grid(cfg, args.m_list, args.s_list, args.threads)
    rows = [(c.m, c.s, c.trials, c.successes, c.rate) for c in cells]
    path = _out(args, "phase_grid.csv")
    write_rows(path, ("m", "s", "trials", "successes", "rate"), rows)
    print(path)
    return EXIT_OK


def cmd_noise_sweep(args) -> int:
    cfg = _load(args)
    rep = noise_scaling_sweep(cfg, args.threads)
    rows = list(zip(rep.m_values, rep.medians))
    write_rows(_out(args, "noise_sweep.csv"), ("m", "median_err_l2"), rows)
    if rep.skipped:
        print(f"skipped # {rep.reason}")
    else:
        print(f"{_fmt(rep.slope)} {_fmt(rep.ci_low)} {_fmt(rep.ci_high)} {_fmt(rep.expected)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    def global_flags(p, suppress):
        # The subcommand copies must not overwrite values given before the subcommand.
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p.add_argument("--seed", type=int, default=d(None), help="base seed (default 0, or the config's)")
        p.add_argument("--threads", type=int, default=d(None), help="worker threads (default $SPARSEREC_THREADS or 1)")
        p.add_argument("--out-dir", default=d("."), help="directory for output files")

    common = _Parser(add_help=False)
    global_flags(common, suppress=True)
    parser = _Parser(prog="sparserec", description="Sparse recovery via l_p-constrained basis pursuit.")
    global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=func)
        return p

    p = add("gen-matrix", cmd_gen_matrix, "sample a random measurement matrix")
    p.add_argument("--kind", choices=KINDS, default="gaussian")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--out", default=None)

    p = add("solve", cmd_solve, "minimise ||z||_1 subject to ||Az - y||_p <= eps")
    p.add_argument("--A", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--p", type=_p_value, default=2.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol-feas", type=float, default=None)
    p.add_argument("--tol-obj", type=float, default=None)
    p.add_argument("--out", default=None)

    p = add("certify-nsp", cmd_certify_nsp, "decide the l_1-robust null space property")
    p.add_argument("--A", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--p", type=_p_value, default=2.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--raw-norm", action="store_true", help="use ||Ax||_p instead of m^(-1/p) ||Ax||_p")
    p.add_argument("--refine", action="store_true", help="resolve every margin to within tol")

    p = add("estimate-rip", cmd_estimate_rip, "estimate RIP_{p,q} constants")
    p.add_argument("--A", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--p", type=_p_value, default=2.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=1000)

    p = add("gap-demo", cmd_gap_demo, "RIP_{1,1} gap ratio for Gaussian matrices")
    p.add_argument("--m", type=int, default=400)
    p.add_argument("--s", type=int, default=16)
    p.add_argument("--trials", type=int, default=200)

    p = add("pipeline-check", cmd_pipeline_check, "evaluate the small-ball lower bound")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=_p_value, default=2.0)

    p = add("quantize-demo", cmd_quantize_demo, "recovery from quantized measurements")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--trials", type=int, default=20)

    p = add("experiment", cmd_experiment, "run the trials of a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--name", default="experiment.csv")
    p.add_argument("--timings", action="store_true", help="fill wall_time_ms (output no longer reproducible)")

    p = add("phase-grid", cmd_phase_grid, "success rates over an (m, s) grid")
    p.add_argument("--config", required=True)
    p.add_argument("--m-list", type=_int_list, required=True)
    p.add_argument("--s-list", type=_int_list, required=True)

    p = add("noise-sweep", cmd_noise_sweep, "log-log slope of median error against m")
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads is None:
            args.threads = _default_threads()
        if args.threads < 1:
            raise _UsageError("--threads must be >= 1")
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidParameterError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
