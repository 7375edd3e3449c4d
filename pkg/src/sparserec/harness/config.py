"""Plain-text experiment configuration.

``key = value`` lines under ``[ensemble]``, ``[signal]``, ``[experiment]`` and
``[solver]`` headers; ``#`` starts a comment. Unknown sections or keys are
errors. Example::

    [ensemble]
    kind = gaussian

    [signal]
    n = 64
    s = 2

    [experiment]
    m_values = auto
    prefactor = 4
    trials = 100
    p = 2
    epsilon_rule = fixed
    epsilon = 0

``m_values = auto`` expands to ``optimal_m(n, s, prefactor)``. The ensemble's
``n`` comes from the signal section and its ``m`` from ``m_values``.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import fields
from pathlib import Path

from ..core import InvalidParameterError
from ..ensembles import EnsembleSpec
from ..solvers import SolverConfig
from .experiment import ExperimentConfig, optimal_m
from .signals import SignalSpec

__all__ = ["ConfigError", "parse_config", "parse_config_text", "write_config", "format_config"]


class ConfigError(InvalidParameterError):
    """Malformed or incomplete configuration; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None, path=None):
        where = f"{path}:" if path is not None else ""
        where += f"{lineno}: " if lineno is not None else (" " if where else "")
        super().__init__(f"{where}{message}")
        self.lineno = lineno


_SECTIONS = {
    "ensemble": {"kind", "gamma"},
    "signal": {"n", "s", "kind", "alpha", "normalize"},
    "experiment": {"m_values", "prefactor", "trials", "p", "q", "r", "epsilon_rule", "epsilon", "base_seed"},
    "solver": {f.name for f in fields(SolverConfig)},
}
_REQUIRED = {"signal": ("n", "s"), "experiment": ("m_values", "trials")}

_HEADER = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=#;\s][^=]*?)\s*=")


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    """Line numbers of section headers ``(sec, None)`` and keys ``(sec, key)``."""
    index: dict[tuple[str, str | None], int] = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        h = _HEADER.match(line)
        if h:
            section = h.group(1).strip()
            index.setdefault((section, None), no)
            continue
        k = _KEY.match(line)
        if k and section is not None:
            index.setdefault((section, k.group(1).strip().lower()), no)
    return index


def _parse_p(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def parse_config_text(text: str, path=None) -> ExperimentConfig:
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",), interpolation=None,
                                       empty_lines_in_values=False)
    try:
        parser.read_string(text, source=str(path) if path else "<config>")
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", exc.lineno, path) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected key = value)", lineno, path) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1], exc.lineno, path) from None

    index = _line_index(text)
    for sec in parser.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]", index.get((sec, None)), path)
        for key in parser[sec]:
            if key not in _SECTIONS[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", index.get((sec, key)), path)
    for sec, keys in _REQUIRED.items():
        for key in keys:
            if not parser.has_option(sec, key):
                raise ConfigError(f"missing required key {key!r} in [{sec}]", None, path)

    def get(sec, key, conv, default=None):
        if not parser.has_option(sec, key):
            return default
        raw = parser.get(sec, key)
        try:
            return conv(raw)
        except ValueError:
            raise ConfigError(f"bad value {raw!r} for {key!r} in [{sec}]", index.get((sec, key)), path) from None

    try:
        n = get("signal", "n", int)
        s = get("signal", "s", int)
        signal = SignalSpec(
            n=n, s=s,
            kind=get("signal", "kind", str, "gaussian_coeffs"),
            alpha=get("signal", "alpha", float, 1.0),
            normalize=get("signal", "normalize", str, "none"),
        )
        raw_m = parser.get("experiment", "m_values").strip()
        if raw_m.lower() == "auto":
            m_values = (optimal_m(n, s, get("experiment", "prefactor", float, 4.0)),)
        else:
            m_values = get("experiment", "m_values", lambda v: tuple(int(t) for t in v.replace(",", " ").split()))
        ensemble = EnsembleSpec(
            kind=get("ensemble", "kind", str, "gaussian"), m=m_values[0] if m_values else 1, n=n,
            gamma=get("ensemble", "gamma", float),
        )
        solver_kwargs = {}
        for f in fields(SolverConfig):
            conv = int if f.name in ("max_iters", "window", "check_every", "operator_norm_iters") else float
            v = get("solver", f.name, conv)
            if v is not None:
                solver_kwargs[f.name] = v
        return ExperimentConfig(
            ensemble=ensemble,
            signal=signal,
            m_values=m_values,
            trials=get("experiment", "trials", int),
            p=get("experiment", "p", _parse_p, 2.0),
            q=get("experiment", "q", float, 2.0),
            r=get("experiment", "r", float, 2.0),
            epsilon_rule=get("experiment", "epsilon_rule", str, "fixed"),
            epsilon=get("experiment", "epsilon", float, 0.0),
            base_seed=get("experiment", "base_seed", int, 0),
            solver=SolverConfig(**solver_kwargs),
        )
    except ConfigError:
        raise
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), None, path) from None


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), path)


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def format_config(cfg: ExperimentConfig) -> str:
    lines = ["[ensemble]", f"kind = {cfg.ensemble.kind}"]
    if cfg.ensemble.gamma is not None:
        lines.append(f"gamma = {_fmt(float(cfg.ensemble.gamma))}")
    sig = cfg.signal
    lines += ["", "[signal]", f"n = {sig.n}", f"s = {sig.s}", f"kind = {sig.kind}",
              f"alpha = {_fmt(float(sig.alpha))}", f"normalize = {sig.normalize}"]
    lines += ["", "[experiment]", "m_values = " + ", ".join(str(m) for m in cfg.m_values),
              f"trials = {cfg.trials}", f"p = {_fmt(float(cfg.p))}", f"q = {_fmt(float(cfg.q))}",
              f"r = {_fmt(float(cfg.r))}", f"epsilon_rule = {cfg.epsilon_rule}",
              f"epsilon = {_fmt(float(cfg.epsilon))}", f"base_seed = {cfg.base_seed}"]
    lines += ["", "[solver]"]
    for f in fields(SolverConfig):
        v = getattr(cfg.solver, f.name)
        if v is not None:
            lines.append(f"{f.name} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def write_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(format_config(cfg), encoding="utf-8")
