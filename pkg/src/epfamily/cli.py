"""Command-line interface: ``epfamily {fit,compare,km,simulate,quantile,sample}``.

Exit codes: 0 success, 1 input error, 2 fit did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .baselines import FAMILIES, get_family
from .family import DomainError
from .inference import CensoredSample, FitConfig, FitResult, fit_mle
from .montecarlo import SimScenario, load_scenario, run_scenario
from .nonparam import kaplan_meier
from .dataio import DataFileError, read_data

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2


class CLIError(Exception):
    pass


@dataclass
class FitReport:
    model: str
    estimates: dict[str, float]
    se: dict[str, float] | None
    ci_level: float
    ci: dict[str, list[float]] | None
    loglik: float
    aic: float
    aicc: float | None
    converged: bool
    n: int
    events: int
    censored: int

    @classmethod
    def from_fit(cls, fit: FitResult, data: CensoredSample) -> FitReport:
        names = fit.param_names
        return cls(
            model=fit.family,
            estimates={k: float(v) for k, v in zip(names, fit.estimates)},
            se=None if fit.se is None else {k: float(v) for k, v in zip(names, fit.se)},
            ci_level=fit.ci_level,
            ci=None if fit.ci is None else {k: [float(a), float(b)] for k, (a, b) in zip(names, fit.ci)},
            loglik=float(fit.loglik),
            aic=float(fit.aic),
            aicc=None if fit.aicc is None else float(fit.aicc),
            converged=bool(fit.converged),
            n=len(data),
            events=data.n_events,
            censored=data.n_censored,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> FitReport:
        return cls(**json.loads(text))

    def to_table(self) -> str:
        pct = f"{100 * self.ci_level:g}% CI"
        lines = [
            f"model: {self.model}   n = {self.n} ({self.events} events, {self.censored} censored)",
            f"{'parameter':<10} {'estimate':>14} {'se':>14} {pct:>30}",
        ]
        for name, est in self.estimates.items():
            se = f"{self.se[name]:.6g}" if self.se else "-"
            ci = f"({self.ci[name][0]:.6g}, {self.ci[name][1]:.6g})" if self.ci else "-"
            lines.append(f"{name:<10} {est:>14.6g} {se:>14} {ci:>30}")
        aicc = "-" if self.aicc is None else f"{self.aicc:.6g}"
        lines.append(f"loglik = {self.loglik:.6g}   AIC = {self.aic:.6g}   AICc = {aicc}")
        if self.se is None:
            lines.append("observed information not invertible: non-identifiable/unstable")
        if not self.converged:
            lines.append("WARNING: optimiser did not converge")
        return "\n".join(lines)


def _format(args) -> str:
    if args.format:
        return args.format
    return "table" if sys.stdout.isatty() else "json"


def _params(tokens) -> list[float]:
    out = []
    for tok in tokens:
        out.extend(float(v) for v in tok.split(",") if v.strip())
    return out


def _build(dist: str, tokens):
    fam = get_family(dist)
    params = _params(tokens)
    if len(params) != fam.k:
        raise CLIError(f"{fam.name} takes {fam.k} parameters ({', '.join(fam.param_names)}), got {len(params)}")
    return fam.build(*params)


def _load(args) -> CensoredSample:
    try:
        data = read_data(args.data, raw=args.raw)
    except OSError as exc:
        raise CLIError(f"cannot read {args.data}: {exc.strerror or exc}") from None
    if len(data) == 0:
        raise CLIError(f"{args.data}: no records")
    return data


def _config(args) -> FitConfig:
    return FitConfig(starts=args.starts, ci_level=args.level)


def cmd_fit(args) -> tuple[str, int]:
    data = _load(args)
    fit = fit_mle(get_family(args.dist), data, _config(args))
    report = FitReport.from_fit(fit, data)
    out = report.to_table() if _format(args) == "table" else report.to_json()
    return out, EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def cmd_compare(args) -> tuple[str, int]:
    requested = list(FAMILIES) if args.dist is None else args.dist
    dists = [d for tok in requested for d in tok.split(",") if d.strip()]
    if len(dists) < 2:
        raise CLIError("compare needs at least two distributions")
    fams = [get_family(d) for d in dists]
    data = _load(args)
    config = _config(args)
    rows = []
    for fam in fams:
        try:
            fit = fit_mle(fam, data, config)
            rows.append({
                "model": fam.name, "k": fam.k, "loglik": fit.loglik, "aic": fit.aic,
                "aicc": fit.aicc, "converged": fit.converged,
                "identifiable": fit.identifiable, "error": None,
            })
        except (ValueError, RuntimeError) as exc:
            rows.append({
                "model": fam.name, "k": fam.k, "loglik": None, "aic": None, "aicc": None,
                "converged": False, "identifiable": False, "error": str(exc),
            })
    rows.sort(key=lambda r: math.inf if r["aic"] is None else r["aic"])
    best = rows[0]["aic"]
    for r in rows:
        r["best"] = r["aic"] is not None and r["aic"] == best
    if _format(args) == "json":
        return json.dumps(rows, indent=2), EXIT_OK
    lines = [f"{'model':<8} {'k':>2} {'loglik':>12} {'AIC':>12} {'AICc':>12}  notes"]
    for r in rows:
        if r["error"]:
            lines.append(f"{r['model']:<8} {r['k']:>2} {'-':>12} {'-':>12} {'-':>12}  FAILED: {r['error']}")
            continue
        notes = []
        if r["best"]:
            notes.append("* minimum")
        if not r["converged"]:
            notes.append("not converged")
        if not r["identifiable"]:
            notes.append("non-identifiable")
        aicc = "-" if r["aicc"] is None else f"{r['aicc']:.2f}"
        lines.append(
            f"{r['model']:<8} {r['k']:>2} {r['loglik']:>12.4f} {r['aic']:>12.2f} {aicc:>12}  {', '.join(notes)}"
        )
    return "\n".join(lines), EXIT_OK


def cmd_km(args) -> tuple[str, int]:
    data = _load(args)
    curve = kaplan_meier(data)
    cols = {"time": curve.times.tolist(), "survival": curve.survival.tolist()}
    if args.overlay:
        fit = fit_mle(get_family(args.overlay), data, _config(args))
        model = get_family(args.overlay).build(*fit.estimates)
        cols[f"{fit.family}_survival"] = np.atleast_1d(model.sf(curve.times)).tolist()
    fmt = _format(args)
    if fmt == "json":
        rows = [dict(zip(cols, vals)) for vals in zip(*cols.values())]
        return json.dumps(rows, indent=2), EXIT_OK
    sep = "," if fmt == "csv" else "  "
    lines = [sep.join(cols)]
    for vals in zip(*cols.values()):
        lines.append(sep.join(f"{v:.10g}" for v in vals))
    return "\n".join(lines), EXIT_OK


def cmd_simulate(args) -> tuple[str, int]:
    if args.scenario:
        try:
            sc = load_scenario(args.scenario)
        except OSError as exc:
            raise CLIError(f"cannot read {args.scenario}: {exc.strerror or exc}") from None
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            sc = SimScenario(**{**sc.__dict__, **overrides})
    else:
        missing = [f for f in ("dist", "params", "n", "censoring", "replications") if getattr(args, f) is None]
        if missing:
            raise CLIError("simulate needs a scenario file or --" + ", --".join(missing))
        if args.seed is None:
            raise CLIError("simulate requires --seed for reproducibility")
        sc = SimScenario(
            family=args.dist,
            true_params=tuple(_params(args.params)),
            n=args.n,
            censor_fraction=args.censoring,
            replications=args.replications,
            seed=args.seed,
            fit_config=FitConfig(starts=args.starts, ci_level=args.level),
        )
    summary = run_scenario(sc)
    rows = summary.to_rows()
    if _format(args) == "table":
        head = (
            f"{sc.family} n={sc.n} censoring={sc.censor_fraction:g} "
            f"(realized {summary.realized_censoring:.4f}) N={sc.replications} "
            f"failed={summary.n_failed}{' UNRELIABLE' if summary.unreliable else ''}"
        )
        lines = [head, f"{'parameter':<10} {'true':>10} {'bias':>12} {'mse':>12} {'cp':>8}"]
        for r in rows:
            lines.append(
                f"{r['parameter']:<10} {r['true']:>10.6g} {r['bias']:>12.6g} {r['mse']:>12.6g} {100 * r['cp']:>7.2f}%"
            )
        return "\n".join(lines), EXIT_OK
    return "\n".join(json.dumps(r) for r in rows), EXIT_OK


def cmd_quantile(args) -> tuple[str, int]:
    model = _build(args.dist, args.params)
    ps = _params(args.p)
    qs = np.atleast_1d(model.ppf(ps)).tolist()
    if _format(args) == "json":
        return json.dumps([{"p": p, "quantile": q} for p, q in zip(ps, qs)]), EXIT_OK
    return "\n".join(f"{p:.10g}\t{q:.10g}" for p, q in zip(ps, qs)), EXIT_OK


def cmd_sample(args) -> tuple[str, int]:
    if args.n < 1:
        raise CLIError("sample size must be at least 1")
    model = _build(args.dist, args.params)
    draws = model.rvs(args.n, seed=args.seed).tolist()
    if _format(args) == "json":
        return json.dumps(draws), EXIT_OK
    return "\n".join(f"{x:.10g}" for x in draws), EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors; exit code 2 is reserved for non-convergence
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="epfamily",
        description="Extended Poisson family lifetime models: fitting, comparison, simulation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("table", "json", "csv"))

    data_opts = _Parser(add_help=False)
    data_opts.add_argument("--data", required=True, help="CSV with header time,status")
    data_opts.add_argument("--raw", action="store_true", help="whitespace values, trailing + = censored")

    fit_opts = _Parser(add_help=False)
    fit_opts.add_argument("--level", type=float, default=0.95)
    fit_opts.add_argument("--starts", type=int, default=8)

    p = sub.add_parser("fit", parents=[common, data_opts, fit_opts], help="maximum likelihood fit")
    p.add_argument("--dist", required=True, choices=list(FAMILIES))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", parents=[common, data_opts, fit_opts], help="AIC/AICc comparison")
    p.add_argument("--dist", nargs="*", help="models to compare (default: all)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("km", parents=[common, data_opts, fit_opts], help="Kaplan-Meier curve")
    p.add_argument("--overlay", choices=list(FAMILIES), help="add a fitted model's survival")
    p.set_defaults(func=cmd_km)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo bias/MSE/coverage study")
    p.add_argument("scenario", nargs="?", help="key = value scenario file")
    p.add_argument("--dist", choices=list(FAMILIES))
    p.add_argument("--params", nargs="+")
    p.add_argument("--n", type=int)
    p.add_argument("--censoring", type=float)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--starts", type=int, default=8)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("quantile", parents=[common], help="quantiles of a model")
    p.add_argument("--dist", required=True, choices=list(FAMILIES))
    p.add_argument("--params", nargs="+", required=True)
    p.add_argument("--p", nargs="+", required=True)
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("sample", parents=[common], help="random draws from a model")
    p.add_argument("--dist", required=True, choices=list(FAMILIES))
    p.add_argument("--params", nargs="+", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out, code = args.func(args)
    except (CLIError, DataFileError, DomainError, ValueError, RuntimeError) as exc:
        print(f"epfamily {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
