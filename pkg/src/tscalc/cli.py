"""Command-line front end.

Every command builds a JSON-able dict; ``--format json`` prints it
canonically (sorted keys, no timings), ``--format table`` renders the same
dict for humans and ``--format csv`` is offered where rows exist.

Exit codes: 0 success, 1 a checked property failed, 2 usage or
precondition error.  ``TS_PRECISION`` and ``TS_TOL`` override the built-in
precision and tolerance defaults; explicit flags override both.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

from mpmath import mp

from .errors import TimeScaleError
from .gridfn import cauchy_mvt_witnesses, load_csv
from .lhopital import (
    SuiteConfig,
    load_suite_config,
    run_property_suite,
    verify_delta_rule,
    verify_nabla_rule,
)
from .numeric import exact
from .qbounds import BoundProblem, sandwich_report, verify_derivative_chain
from .qcalc import QContext, q_exponential
from .scale import _fmt, parse_scale

OK, FAILED, USAGE = 0, 1, 2
DEFAULT_PRECISION = 30
DEFAULT_TOL = 1e-10
DEFAULT_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class CliConfig:
    command: str
    scale: str | None = None
    q: str | None = None
    a_exp: int | None = None
    b_exp: int | None = None
    n: int | None = None
    trials: int | None = None
    seed: int | None = None
    tol: float = DEFAULT_TOL
    tail_tol: float = DEFAULT_TAIL_TOL
    precision: int = DEFAULT_PRECISION
    format: str = "table"
    verbose: bool = False


class UsageError(Exception):
    pass


def _env(name: str, conv, default):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return conv(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not a valid value") from None


def build_config(args: argparse.Namespace) -> CliConfig:
    precision = args.precision if getattr(args, "precision", None) is not None else _env("TS_PRECISION", int, DEFAULT_PRECISION)
    tol = args.tol if getattr(args, "tol", None) is not None else _env("TS_TOL", float, DEFAULT_TOL)
    tail_tol = getattr(args, "tail_tol", None)
    cfg = CliConfig(
        command=args.cmd_path,
        scale=getattr(args, "scale", None),
        q=getattr(args, "q", None),
        a_exp=getattr(args, "a_exp", None),
        b_exp=getattr(args, "b_exp", None),
        n=getattr(args, "n", None),
        trials=getattr(args, "trials", None),
        seed=getattr(args, "seed", None),
        tol=tol,
        tail_tol=DEFAULT_TAIL_TOL if tail_tol is None else tail_tol,
        precision=precision,
        format=getattr(args, "format", "table"),
        verbose=getattr(args, "verbose", False),
    )
    if cfg.precision < 1:
        raise UsageError("precision must be positive")
    if cfg.tol <= 0 or cfg.tail_tol <= 0:
        raise UsageError("tolerances must be positive")
    if cfg.trials is not None and cfg.trials < 0:
        raise UsageError("--trials must be >= 0")
    if cfg.n is not None and cfg.n < 1:
        raise UsageError("--n must be >= 1")
    return cfg


# --- rendering ---------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "-"
    if isinstance(v, (list, tuple)) and not v:
        return "none"
    if isinstance(v, (list, tuple)) and all(not isinstance(x, (dict, list)) for x in v):
        return ",".join(_cell(x) for x in v)
    return str(v)


def render_table(d: dict) -> str:
    """Human rendering of a report dict: scalars as ``key: value`` lines,
    lists of records as aligned columns."""
    lines: list[str] = []
    _render(d, "", lines)
    return "\n".join(lines) + "\n"


def _render(d: dict, prefix: str, lines: list[str]):
    tables = []
    for key in sorted(d):
        v = d[key]
        name = f"{prefix}{key}"
        if isinstance(v, dict):
            _render(v, f"{name}.", lines)
        elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            tables.append((name, v))
        else:
            lines.append(f"{name}: {_cell(v)}")
    for name, rows in tables:
        cols = list(rows[0])
        for r in rows[1:]:
            cols += [c for c in r if c not in cols]
        cells = [[_cell(r.get(c)) for c in cols] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        lines.append("")
        lines.append(f"{name}:")
        lines.append("  " + "  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
        for row in cells:
            lines.append("  " + "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())


def emit(payload: dict, fmt: str, csv_text: str | None = None):
    if fmt == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    elif fmt == "csv":
        if csv_text is None:
            raise UsageError("this command has no CSV output; use table or json")
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(render_table(payload))


# --- commands ------------------------------------------------------------------

def _ctx(cfg: CliConfig) -> QContext:
    return QContext(exact(cfg.q), cfg.precision, cfg.tail_tol)


def cmd_scale_info(cfg: CliConfig, args) -> int:
    ts = parse_scale(cfg.scale)
    out = {"spec": ts.spec(), "discrete": ts.is_discrete}
    if not ts.is_discrete:
        out.update(min=str(ts.min_point), max=str(ts.max_point), points=None)
        emit(out, cfg.format)
        return OK
    pts = ts.all_points()
    rows = []
    for p in pts:
        c = ts.classify(p)
        right = "dense" if c.right_dense else "scattered" if c.right_scattered else "end"
        left = "dense" if c.left_dense else "scattered" if c.left_scattered else "end"
        rows.append(
            {
                "t": str(p),
                "sigma": str(ts.sigma(p)),
                "rho": str(ts.rho(p)),
                "mu": _fmt(ts.mu(p)),
                "nu": _fmt(ts.nu(p)),
                "right": right,
                "left": left,
            }
        )
    out.update(min=str(ts.min_point), max=str(ts.max_point), n_points=len(pts), points=rows)
    csv_text = "t,sigma,rho,mu,nu,right,left\n" + "".join(",".join(r.values()) + "\n" for r in rows)
    emit(out, cfg.format, csv_text)
    return OK


def cmd_qexp(cfg: CliConfig, args) -> int:
    ctx = _ctx(cfg)
    x = exact(args.x)
    res = q_exponential(ctx, x)
    with ctx.workdps():
        out = {
            "q": _fmt(ctx.q),
            "x": _fmt(x),
            "value": mp.nstr(res.value, cfg.precision),
            "terms_used": res.terms_used,
            "tail_bound": mp.nstr(res.tail_bound, 6),
            "tail_tol": cfg.tail_tol,
            "precision": cfg.precision,
        }
    emit(out, cfg.format)
    return OK


def _problem(cfg: CliConfig) -> BoundProblem:
    return BoundProblem(_ctx(cfg), cfg.a_exp, cfg.b_exp, cfg.n)


def cmd_bounds(cfg: CliConfig, args) -> int:
    rep = sandwich_report(_problem(cfg), cfg.tol, args.at or ())
    out = rep.to_dict()
    out["endpoints_ok"] = rep.endpoints_ok
    emit(out, cfg.format, rep.to_csv())
    return OK if rep.all_passed and rep.endpoints_ok else FAILED


def cmd_verify_chain(cfg: CliConfig, args) -> int:
    rep = verify_derivative_chain(_problem(cfg), cfg.tol)
    emit(rep.to_dict(), cfg.format)
    return OK if rep.passed else FAILED


def cmd_verify_lhopital(cfg: CliConfig, args) -> int:
    base = load_suite_config(args.config) if args.config else SuiteConfig()
    overrides = {}
    if cfg.trials is not None:
        overrides["trials"] = cfg.trials
    if cfg.seed is not None:
        overrides["seed"] = cfg.seed
    if args.tol is not None or os.environ.get("TS_TOL"):
        overrides["tol"] = cfg.tol
    if cfg.scale:
        parse_scale(cfg.scale)  # fail early with a usage error
        overrides["scale"] = cfg.scale
    if args.nabla:
        overrides["kind"] = "nabla"
    if args.non_strict:
        overrides["force_non_strict"] = True
    suite = replace(base, **overrides)
    rep = run_property_suite(suite)
    if cfg.format == "json":
        sys.stdout.write(rep.to_json(cfg.verbose) + "\n")
    else:
        emit(rep.to_dict(cfg.verbose), cfg.format)
    return FAILED if rep.violations else OK


def cmd_verify_rule(cfg: CliConfig, args) -> int:
    ts = parse_scale(cfg.scale) if cfg.scale else None
    f, g = load_csv(args.csv, ts)
    if g is None:
        raise UsageError("the rule needs a g column")
    verify = verify_nabla_rule if args.nabla else verify_delta_rule
    rep = verify(f, g, args.side, strict=not args.non_strict, tol=cfg.tol)
    p = rep.premises
    out = rep.summary()
    out["scale"] = f.scale.spec()
    out["premise_interval"] = str(p.interval)
    out["closure_ratio"] = None if p.closure_verdict is None else p.closure_verdict.kind.value
    out["closure_covered"] = p.closure_covered(not args.non_strict)
    out["h"] = [{"x": str(x), "H": _num(v, cfg.precision)} for x, v in rep.h_samples]
    emit(out, cfg.format)
    return FAILED if rep.status.value == "violated" else OK


def cmd_mvt(cfg: CliConfig, args) -> int:
    ts = parse_scale(cfg.scale) if cfg.scale else None
    F, G = load_csv(args.csv, ts)
    if G is None:
        raise UsageError("the mean value check needs a g column")
    a = F.domain.lower
    w = cauchy_mvt_witnesses(F, G, a, exact(args.x))
    out = {
        "a": str(a),
        "x": _fmt(exact(args.x)),
        "c1": str(w.c1),
        "c2": str(w.c2),
        "lower_ratio": _num(w.lower_ratio, cfg.precision),
        "secant_ratio": _num(w.middle_ratio, cfg.precision),
        "upper_ratio": _num(w.upper_ratio, cfg.precision),
        "holds": w.holds,
    }
    emit(out, cfg.format)
    return OK if w.holds else FAILED


def _num(v, digits: int) -> str:
    try:
        return _fmt(exact(v)) if not hasattr(v, "_mpf_") else mp.nstr(v, digits)
    except TypeError:
        return str(v)


# --- parser ------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, formats=("table", "json")):
    p.add_argument("--format", choices=formats, default="table")
    p.add_argument("--tol", type=float, default=None, help="verification tolerance (env TS_TOL)")


def _add_q(p: argparse.ArgumentParser):
    p.add_argument("--q", required=True, help="base q in (0, 1), e.g. 0.5 or 1/2")
    p.add_argument("--precision", type=int, default=None, help="decimal digits (env TS_PRECISION)")
    p.add_argument("--tail-tol", type=float, default=None, help="series tail tolerance")


def _add_problem(p: argparse.ArgumentParser):
    _add_q(p)
    p.add_argument("--a-exp", type=int, required=True, help="a = q**A")
    p.add_argument("--b-exp", type=int, required=True, help="b = q**B")
    p.add_argument("--n", type=int, required=True)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tscalc", description="Time-scale calculus and q-exponential bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    scale = sub.add_parser("scale", help="inspect a time scale")
    scale_sub = scale.add_subparsers(dest="action", required=True)
    info = scale_sub.add_parser("info", help="points, jumps and graininess")
    info.add_argument("--scale", required=True, help='e.g. "qscale q=0.5 kmin=0 kmax=6" or "finite 0,1,2,4"')
    info.add_argument("--format", choices=("table", "json", "csv"), default="table")
    info.set_defaults(func=cmd_scale_info, cmd_path="scale info")

    qexp = sub.add_parser("qexp", help="evaluate the q-exponential with a tail certificate")
    _add_q(qexp)
    qexp.add_argument("--x", required=True)
    qexp.add_argument("--format", choices=("table", "json"), default="table")
    qexp.set_defaults(func=cmd_qexp, cmd_path="qexp")

    bounds = sub.add_parser("bounds", help="lower/upper bounds on the q-lattice of [q^-1 a, b]")
    _add_problem(bounds)
    _add_common(bounds, ("table", "csv", "json"))
    bounds.add_argument("--at", action="append", help="extra (possibly off-lattice) x to report; repeatable")
    bounds.set_defaults(func=cmd_bounds, cmd_path="bounds")

    verify = sub.add_parser("verify", help="property checks")
    vsub = verify.add_subparsers(dest="action", required=True)

    lh = vsub.add_parser("lhopital", help="randomized l'Hopital rule suite")
    lh.add_argument("--trials", type=int, default=None)
    lh.add_argument("--seed", type=int, default=None)
    lh.add_argument("--scale", default=None, help="fix the scale for every trial")
    lh.add_argument("--nabla", action="store_true", help="check the nabla rule (directly and via duality)")
    lh.add_argument("--non-strict", action="store_true", help="verify every profile in its non-strict form")
    lh.add_argument("--config", default=None, help="suite config file (JSON or key=value)")
    lh.add_argument("--verbose", action="store_true", help="include per-trial records")
    _add_common(lh)
    lh.set_defaults(func=cmd_verify_lhopital, cmd_path="verify lhopital")

    chain = vsub.add_parser("chain", help="derivative chain behind the bounds")
    _add_problem(chain)
    _add_common(chain)
    chain.set_defaults(func=cmd_verify_chain, cmd_path="verify chain")

    rule = vsub.add_parser("rule", help="check the rule on a t,f,g CSV")
    rule.add_argument("--csv", required=True)
    rule.add_argument("--scale", default=None, help="scale of the t column (default: the listed points)")
    rule.add_argument("--nabla", action="store_true")
    rule.add_argument("--side", choices=("left", "right"), default="left")
    rule.add_argument("--non-strict", action="store_true")
    rule.add_argument("--precision", type=int, default=None)
    _add_common(rule)
    rule.set_defaults(func=cmd_verify_rule, cmd_path="verify rule")

    mvt = sub.add_parser("mvt", help="Cauchy mean value witnesses from a t,f,g CSV")
    mvt.add_argument("--csv", required=True)
    mvt.add_argument("--x", required=True)
    mvt.add_argument("--scale", default=None, help="scale of the t column (default: the listed points)")
    mvt.add_argument("--precision", type=int, default=None)
    mvt.add_argument("--format", choices=("table", "json"), default="table")
    mvt.set_defaults(func=cmd_mvt, cmd_path="mvt")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)  # exits 2 on malformed usage
    try:
        cfg = build_config(args)
        return args.func(cfg, args)
    except (UsageError, TimeScaleError, ValueError, OSError) as exc:
        print(f"tscalc: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
