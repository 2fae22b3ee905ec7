"""Command-line entry point: ``rvfilter <subcommand> ...``.

Exit codes
    0  Determining (check) / all checks passed (verify, counterexample) / success
    1  invalid input; the message goes to stderr
    2  NotDetermining (check)
    3  WindowCertified (check)
    4  a verification check failed (verify, counterexample)
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .certify import DETERMINING, NOT_DETERMINING, WINDOW_CERTIFIED, find_zero
from .curves import curves_csv, curves_svg, trace_curves
from .laws import (
    CounterexampleLaw,
    CounterexampleSpec,
    Discrete,
    Law,
    MomentDivergence,
    Symmetrized,
    parse_law,
)
from .measures import ExpKernel, FilterModel, GeometricAtoms, PowerAtoms, StepKernel, build_noise_law
from .simulate import (
    LevyModel,
    TailReport,
    oscillation,
    verify_integral,
    verify_product,
    verify_slow_variation_sum,
    verify_weighted_sum,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_DETERMINING = 2
EXIT_WINDOW = 3
EXIT_CHECK_FAILED = 4

_VERDICT_EXIT = {DETERMINING: EXIT_OK, NOT_DETERMINING: EXIT_NOT_DETERMINING,
                 WINDOW_CERTIFIED: EXIT_WINDOW}


class InputError(ValueError):
    """Bad command-line input."""


@dataclass
class RunConfig:
    """Everything a run depends on; JSON round-trips and reproduces the run with the seed."""

    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None
    tol: float = 1e-12

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(d["subcommand"], dict(d.get("params", {})), int(d.get("seed", 0)), d.get("out"),
                   float(d.get("tol", 1e-12)))


# ---------------------------------------------------------------------------
# descriptor parsing


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"not a comma-separated list of numbers: {text!r}") from exc


def parse_weights(text: str):
    """``0.5,0.5,1``, ``geom:ratio[,scale[,start]]``, ``power:gamma`` or ``list+family``."""
    head, plus, tail = text.partition("+")
    if not plus and head.split(":")[0] in ("geom", "power"):
        head, tail = "", head
    weights = _floats(head) if head else []
    family = None
    if tail:
        kind, _, args = tail.partition(":")
        vals = _floats(args)
        if kind == "geom" and 1 <= len(vals) <= 3:
            ratio = vals[0]
            scale = vals[1] if len(vals) > 1 else 1.0
            start = int(vals[2]) if len(vals) > 2 else 1
            family = GeometricAtoms(scale, ratio, start)
        elif kind == "power" and len(vals) == 1:
            family = PowerAtoms(vals[0])
        else:
            raise InputError(f"unknown weight family {tail!r}")
    if not weights and family is None:
        raise InputError("no weights given")
    return weights, family


def parse_kernel(text: str):
    """``exp:rate``, ``exp2:rate`` (two-sided), ``step:v1,v2,...`` or ``step:v1@len1,...``."""
    kind, _, args = text.partition(":")
    if kind in ("exp", "exp2"):
        vals = _floats(args)
        if len(vals) != 1:
            raise InputError("exponential kernel takes one rate")
        return ExpKernel(vals[0], kind == "exp2")
    if kind == "step":
        values, lengths = [], []
        for item in args.split(","):
            v, at, m = item.partition("@")
            try:
                values.append(float(v))
                lengths.append(float(m) if at else 1.0)
            except ValueError as exc:
                raise InputError(f"bad step kernel entry {item!r}") from exc
        return StepKernel(tuple(values), tuple(lengths))
    raise InputError(f"unknown kernel kind {kind!r}")


def _parse_law(text: str) -> Law:
    try:
        return parse_law(text)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _filter_from_args(args) -> FilterModel:
    given = [v is not None for v in (args.weights, args.dist, args.kernel)]
    if sum(given) != 1:
        raise InputError("give exactly one of --weights, --dist, --kernel")
    if args.alpha is None or not args.alpha > 0:
        raise InputError("--alpha must be positive")
    if args.weights is not None:
        weights, family = parse_weights(args.weights)
        return FilterModel.weighted_sum(weights, args.alpha, family=family)
    if args.dist is not None:
        return FilterModel.product(_parse_law(args.dist), args.alpha)
    return FilterModel.kernel_integral(parse_kernel(args.kernel), args.alpha)


# ---------------------------------------------------------------------------
# output helpers


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_scenarios() -> dict:
    text = resources.files("rvfilter").joinpath("data/scenarios.json").read_text()
    return json.loads(text)


def load_verdict_schema() -> dict:
    text = resources.files("rvfilter").joinpath("data/verdict.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    model = _filter_from_args(args)
    verdict = find_zero(model, theta_max=args.theta_max, tol=args.tol)
    text = verdict.to_json()
    print(text)
    if args.out:
        _write(Path(args.out), text + "\n")
    return _VERDICT_EXIT[verdict.kind]


def _evaluate_checks(rep: TailReport, checks: Sequence[dict], alpha: float) -> list[dict]:
    out = []
    for chk in checks:
        kind = chk["type"]
        res = dict(chk)
        if kind == "ratio":
            obs, se = rep.ratio_at(chk["at"])
            target = chk.get("target", rep.target_ratio)
            res.update(observed=obs, stderr=se, target=target,
                       **{"pass": abs(obs - target) <= chk.get("k", 3.0) * se})
        elif kind == "exact_ratio_all":
            xs = rep.thresholds[rep.thresholds >= chk["min_x"]]
            errs = [abs(rep.exact_ratio_at(x) - chk["target"]) for x in xs]
            worst = max(errs) if errs else math.inf
            res.update(max_error=worst, points=len(errs), **{"pass": worst <= chk["tol"]})
        elif kind == "exact_ratio_range":
            val = rep.exact_ratio_at(chk["at"])
            res.update(observed=val, **{"pass": chk["lo"] <= val <= chk["hi"]})
        elif kind == "ratio_range":
            obs, se = rep.ratio_at(chk["at"])
            res.update(observed=obs, stderr=se, **{"pass": chk["lo"] <= obs <= chk["hi"]})
        elif kind == "fitted_index":
            target = chk.get("target", alpha)
            fit = rep.fitted_index
            res.update(observed=fit, **{"pass": fit is not None and abs(fit - target) <= chk["tol"]})
        elif kind == "oscillation":
            osc = rep.notes.get("oscillation")
            res.update(observed=osc, **{"pass": osc is not None and osc >= chk["min"]})
        else:
            raise InputError(f"unknown check type {kind!r}")
        res["pass"] = bool(res["pass"]) and rep.applicable
        out.append(res)
    return out


def run_scenario(name: str, n: Optional[int] = None, seed: int = 0):
    """Run a catalog scenario; returns (report, evaluated checks, scenario dict)."""
    catalog = load_scenarios()["scenarios"]
    if name not in catalog:
        raise InputError(f"unknown scenario {name!r}; known: {', '.join(sorted(catalog))}")
    sc = catalog[name]
    n = int(sc["n"] if n is None else n)
    if n < 1:
        raise InputError("--n must be positive")
    at = tuple(sc["at"])
    kind = sc["kind"]
    alpha = float(sc.get("alpha", 0.0))
    if kind == "product":
        rep = verify_product(parse_law(sc["y"]), parse_law(sc["z"]), alpha, n, seed, at)
    elif kind == "weighted_sum":
        rep = verify_weighted_sum(sc["weights"], parse_law(sc["noise"]), alpha, n, seed, at)
    elif kind == "integral":
        levy = LevyModel(parse_law(sc["jumps"]), float(sc.get("intensity", 1.0)))
        rep = verify_integral(parse_kernel(sc["kernel"]), levy, alpha, sc.get("horizon"), n, seed, at)
    elif kind == "slowvar_sum":
        rep = verify_slow_variation_sum(int(sc["q"]), parse_law(sc["noise"]), n, seed, at)
    else:
        raise InputError(f"scenario kind {kind!r} not supported")
    rep.label = name
    return rep, _evaluate_checks(rep, sc["checks"], alpha), sc


def cmd_verify(args) -> int:
    cfg = RunConfig("verify", {"scenario": args.scenario, "n": args.n}, args.seed, args.out)
    rep, checks, sc = run_scenario(args.scenario, args.n, args.seed)
    summary = rep.summary(checks)
    summary["ref"] = sc["ref"]
    summary["config"] = cfg.to_dict()
    text = _dump(summary)
    if args.out:
        out = Path(args.out)
        _write(out / f"{args.scenario}.csv", rep.to_csv())
        _write(out / f"{args.scenario}.json", text)
    print(text, end="")
    return EXIT_OK if summary["pass"] else EXIT_CHECK_FAILED


def _tail_table(law: Law, alpha: float) -> str:
    base = law.base if isinstance(law, Symmetrized) else law
    spec = base.spec
    x0 = 2.0 * max(base.trunc, 1.0)
    xs = x0 * np.exp(np.linspace(0.0, 4 * math.log(spec.period), 401))
    sf = law.sf(xs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "tail", "scaled_tail", "g"])
    for x, t, g in zip(xs, sf, spec.g(xs)):
        w.writerow([repr(float(x)), repr(float(t)), repr(float(x**alpha * t)), repr(float(g))])
    return buf.getvalue()


def cmd_counterexample(args) -> int:
    if args.a == 0 and args.b == 0:
        raise InputError("trivial example: a and b are both zero")
    if args.a * args.a + args.b * args.b > 1.0:
        raise InputError("a^2 + b^2 must not exceed 1 (g would go negative)")
    if args.alpha is None or not args.alpha > 0:
        raise InputError("--alpha must be positive")
    alpha = args.alpha
    weights = None
    if args.weights is not None:
        weights, family = parse_weights(args.weights)
        if family is not None:
            raise InputError("counterexample weights must be a finite list")
        verdict = find_zero(FilterModel.weighted_sum(weights, alpha), tol=args.tol)
        if verdict.kind != NOT_DETERMINING:
            raise InputError(f"weights are not a NotDetermining set ({verdict.kind}); "
                             "cannot derive theta0")
        theta0 = float(verdict.theta0)
        if args.theta0 is not None and not math.isclose(args.theta0, theta0, rel_tol=1e-9):
            raise InputError(f"--theta0 {args.theta0} disagrees with the derived {theta0!r}")
    elif args.theta0 is not None:
        theta0 = float(args.theta0)
    else:
        raise InputError("theta0 required: pass --theta0 or a NotDetermining --weights set")
    spec = CounterexampleSpec(alpha, theta0, args.a, args.b, args.trunc)
    noise = build_noise_law(spec)
    if weights is not None:
        rep = verify_weighted_sum(weights, noise, alpha, args.n, args.seed, at=())
        filt = {"weights": weights}
    else:
        # two atoms at 1 and e^(pi/theta0) with equal alpha-contributions
        r = math.exp(math.pi / theta0)
        w2 = 1.0 / (1.0 + r**alpha)
        y = Discrete.two_point(1.0, r, 1.0 - w2)
        rep = verify_product(y, noise, alpha, args.n, args.seed, at=(), exact=False)
        filt = {"multiplier": y.to_dict()}
    rep.label = "counterexample"
    checks = [
        {"type": "fitted_index", "target": alpha, "tol": args.index_tol},
        {"type": "oscillation", "min": args.min_oscillation},
    ]
    evaluated = _evaluate_checks(rep, checks, alpha)
    cfg = RunConfig("counterexample", {"alpha": alpha, "theta0": theta0, "a": args.a, "b": args.b,
                                       "trunc": args.trunc, "n": args.n, **filt},
                    args.seed, args.out, args.tol)
    summary = rep.summary(evaluated)
    summary["noise"] = noise.to_dict()
    summary["config"] = cfg.to_dict()
    text = _dump(summary)
    if args.out:
        out = Path(args.out)
        _write(out / "noise_law.json", _dump(noise.to_dict()))
        _write(out / "exact_tail.csv", _tail_table(noise, alpha))
        _write(out / "report.csv", rep.to_csv())
        _write(out / "report.json", text)
    print(text, end="")
    return EXIT_OK if summary["pass"] else EXIT_CHECK_FAILED


def cmd_curves(args) -> int:
    if args.branches < 1:
        raise InputError("--branches must be at least 1")
    if not args.theta_max > 0 or not args.step > 0:
        raise InputError("--theta-max and --step must be positive")
    t0 = time.perf_counter()
    curves = trace_curves((0.0, args.theta_max), args.step, args.branches)
    elapsed = time.perf_counter() - t0
    pts = [p for c in curves for p in c.points]
    summary = {
        "curves": len(curves),
        "points": len(pts),
        "max_residual": max((p.residual for p in pts), default=0.0),
        "min_psi_sum": min((p.psi1 + p.psi2 for p in pts), default=math.nan),
        "config": RunConfig("curves", {"branches": args.branches, "theta_max": args.theta_max,
                                       "step": args.step}, 0, args.out).to_dict(),
    }
    if args.out:
        out = Path(args.out)
        _write(out, curves_csv(curves))
        _write(out.with_suffix(".svg"), curves_svg(curves))
    print(_dump(summary), end="")
    print(f"traced in {elapsed:.2f}s", file=sys.stderr)
    return EXIT_OK


_LAW_KINDS = {
    "pareto:alpha": "P(Y > y) = y^-alpha on y >= 1",
    "uniform:lo,hi": "uniform on [lo, hi]",
    "gamma:shape,rate": "gamma law",
    "lognormal:mu,sigma": "exp(N(mu, sigma^2))",
    "abscauchy": "|C| for standard Cauchy C",
    "twopoint:x1,x2,p1": "atoms x1 (mass p1) and x2",
    "point:x": "a single atom",
    "truncpow:p,a,b": "density proportional to y^(-p-1) on (a, b)",
    "slowvar": "P(Y > y) = min(1, 1/log y), slowly varying",
    "counterexample:alpha,theta0,a,b[,trunc]": "log-periodic law, power tail times g",
    "sym:<law>": "random sign times <law>",
}


def cmd_catalog(args) -> int:
    data = load_scenarios()
    listing = {
        "version": data["version"],
        "scenarios": {k: {"ref": v["ref"], "kind": v["kind"], "n": v["n"]}
                      for k, v in sorted(data["scenarios"].items())},
        "distributions": _LAW_KINDS,
        "kernels": {"exp:rate": "exp(-rate s) on s > 0", "exp2:rate": "exp(-rate |s|)",
                    "step:v1[@len1],v2[@len2],...": "piecewise constant from 0"},
        "weights": {"w1,w2,...": "finite list", "geom:ratio[,scale[,start]]": "scale ratio^j, j >= start",
                    "power:gamma": "j^-gamma, j >= 1", "w1,...+geom:...": "list plus family"},
    }
    print(_dump(listing), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is reserved for NotDetermining
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rvfilter",
                                     description="Regular-variation inversion for linear filters.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="classify a weight set, multiplier law or kernel")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--weights")
    p.add_argument("--dist")
    p.add_argument("--kernel")
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("counterexample", help="build log-periodic noise that defeats a filter")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--theta0", type=float)
    p.add_argument("--weights")
    p.add_argument("--a", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--trunc", type=float, default=None)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--index-tol", type=float, default=0.1)
    p.add_argument("--min-oscillation", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("curves", help="trace two-weight failure curves")
    p.add_argument("--branches", type=int, default=8)
    p.add_argument("--theta-max", type=float, default=100.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("verify", help="run a named Monte Carlo scenario")
    p.add_argument("scenario")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catalog", help="list scenarios and descriptor syntax")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, MomentDivergence, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else exc.__class__.__name__
        print(f"rvfilter {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
