"""Command-line front end for batch replication runs.

Commands: simulate, estimate, average, predict, wtp, density, replicate-sim.
Exit codes: 0 success, 2 usage error, 3 data error, 4 estimation failure.
All outputs are CSV or JSON, written atomically (write-temp-then-rename), and
every command is idempotent given identical inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path


from . import __version__
from .averaging import MAResult, average
from .data import CodingPlan, CodingRule, apply_coding, export_long_csv, load_long_csv
from .errors import DataError, EstimationError
from .estimation import FitResult, MaximizeSettings, fit_model
from .mixing import MixingSpec
from .models import ModelSpec, UtilityTerm
from .postest import (
    density_grid,
    ma_shares,
    predict_shares,
    recovery_score,
    sample_ma_unconditionals,
    sample_unconditionals,
    wtp_summary,
)
from .simgen import (
    SimConfig,
    generate,
    read_truth_grids,
    write_truth_grids,
    write_truth_table,
)

BATCH_FAMILIES = ("normal", "uniform", "triangular", "lognormal", "loguniform",
                  "at", "fm2", "fm3")
MA_GROUP_DEFAULT = ("normal", "uniform", "triangular", "lognormal", "loguniform",
                    "fm2", "fm3")


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_atomic_with(path: Path, writer) -> None:
    """Run a path-consuming writer against a temp file, then rename into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_dataset(data_path, config: dict):
    dataset = load_long_csv(data_path, config["schema"])
    coding = config.get("coding", {})
    if coding:
        plan = CodingPlan({
            attr: CodingRule(rule["kind"], rule.get("reference"))
            for attr, rule in coding.items()})
        dataset = apply_coding(dataset, plan)
    return dataset


def _spec_for(config: dict, dataset, family: str) -> ModelSpec:
    """Model spec from the config, or one coefficient per coded attribute."""
    if "model" in config:
        base = ModelSpec.from_dict(config["model"])
        coefficients = tuple(
            c if c.name == base.price_coefficient else
            MixingSpec(name=c.name, family=family, sign_flip=c.sign_flip,
                       pin_c_zero=c.pin_c_zero)
            for c in base.coefficients)
        return ModelSpec(coefficients=coefficients, terms=base.terms, ascs=base.ascs,
                         space=base.space, price_coefficient=base.price_coefficient,
                         price_attribute=base.price_attribute, rp=base.rp)
    coefficients = tuple(MixingSpec(name=a, family=family)
                         for a in dataset.attribute_names)
    terms = tuple(UtilityTerm(coefficient=a, attribute=a)
                  for a in dataset.attribute_names)
    return ModelSpec(coefficients=coefficients, terms=terms)


def _runconfig(config: SimConfig, n_draws: int) -> dict:
    return {
        "schema_version": 1,
        "schema": config.schema(),
        "coding": {"country": {"kind": "dummy", "reference": config.country_levels[0]},
                   "char": {"kind": "dummy", "reference": config.characteristic_levels[0]}},
        "estimation": {"n_draws": n_draws, "seed": config.seed},
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    out = Path(args.out)
    config = SimConfig(n_persons=args.persons, n_tasks=args.tasks, seed=args.seed)
    dataset, betas, grids = generate(config)

    _write_atomic_with(Path(out, "dataset.csv"),
                       lambda tmp: export_long_csv(dataset, tmp))
    _write_atomic_with(Path(out, "truth_persons.csv"),
                       lambda tmp: write_truth_table(betas, tmp))
    _write_atomic_with(Path(out, "truth_density.csv"),
                       lambda tmp: write_truth_grids(grids, tmp))
    _write_atomic(Path(out, "runconfig.json"),
                  json.dumps(_runconfig(config, args.draws), sort_keys=True, indent=1))
    print(f"wrote dataset ({dataset.n_persons} persons, {dataset.n_tasks} tasks) to {out}")
    return 0


def _fit_one(dataset, config, family, args) -> FitResult:
    spec = _spec_for(config, dataset, family)
    settings = MaximizeSettings(multistart=args.multistart, seed=args.seed)
    return fit_model(spec, dataset, n_draws=args.draws, draw_seed=args.seed,
                     settings=settings, warm_start=args.warm_start)


def _summary_text(rows) -> str:
    lines = ["family,status,ll,aic,bic,n_params,iterations,gradient_norm,floored_persons"]
    for name, fit in rows:
        if isinstance(fit, MAResult):
            lines.append(
                f"{name},{fit.convergence_status},{fit.ll_ma!r},"
                f"{fit.aic_conservative!r},,,,,")
        else:
            c = fit.convergence
            lines.append(
                f"{name},{c.status},{fit.ll!r},{fit.aic!r},{fit.bic!r},"
                f"{fit.n_params},{c.iterations},{c.gradient_norm!r},{c.floored_persons}")
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    out = Path(args.out)
    config = _load_config(args.config)
    dataset = _load_dataset(args.data, config)
    families = BATCH_FAMILIES if args.family == "all" else (args.family,)

    rows = []
    for family in families:
        fit = _fit_one(dataset, config, family, args)
        _write_atomic(Path(out, f"fit_{family}.json"), fit.to_json())
        rows.append((family, fit))
        print(f"{family}: status={fit.convergence.status} ll={fit.ll:.4f} "
              f"aic={fit.aic:.4f}")
    _write_atomic(Path(out, "summary.csv"), _summary_text(rows))
    return 0


def _load_fits(paths) -> list:
    fits = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            fits.append(FitResult.from_json(fh.read()))
    return fits


def cmd_average(args) -> int:
    out = Path(args.out)
    fits = _load_fits(args.fits)
    ids = [Path(p).stem.removeprefix("fit_") for p in args.fits]
    result = average(fits, model_ids=ids, settings=MaximizeSettings(seed=args.seed))
    _write_atomic(Path(out, f"{args.name}.json"), result.to_json())
    weight_lines = ["model,theta,pi"]
    weight_lines += [f"{mid},{float(theta)!r},{float(pi)!r}" for mid, theta, pi in
                     zip(result.model_ids, result.theta, result.pi)]
    _write_atomic(Path(out, f"{args.name}_weights.csv"), "\n".join(weight_lines) + "\n")
    print(f"ll_ma={result.ll_ma:.4f} aic_conservative={result.aic_conservative:.4f} "
          f"pi={[round(float(p), 4) for p in result.pi]}")
    return 0


def _shares_text(rows) -> str:
    labels: list[str] = []
    for _, shares in rows:
        for label in shares:
            if label not in labels:
                labels.append(label)
    lines = ["model," + ",".join(labels)]
    for name, shares in rows:
        lines.append(name + "," + ",".join(
            repr(float(shares[lab])) if lab in shares else "" for lab in labels))
    return "\n".join(lines) + "\n"


def cmd_predict(args) -> int:
    config = _load_config(args.config)
    dataset = _load_dataset(args.data, config)
    fits = _load_fits(args.fits)
    names = [Path(p).stem.removeprefix("fit_") for p in args.fits]
    rows = [(name, predict_shares(fit, dataset)) for name, fit in zip(names, fits)]
    if args.ma:
        with open(args.ma, "r", encoding="utf-8") as fh:
            ma = MAResult.from_json(fh.read())
        rows.append(("ma", ma_shares(ma, [shares for _, shares in rows])))
    _write_atomic(Path(args.out), _shares_text(rows))
    return 0


def cmd_wtp(args) -> int:
    fit = _load_fits([args.fit])[0]
    summary = wtp_summary(fit, n_redraws=args.redraws, seed=args.seed)
    lines = ["coefficient,mean,lower,upper,mean_mrs,lower_mrs,upper_mrs"]
    for row in summary.rows:
        lines.append(
            f"{row.name},{row.mean!r},{row.lower!r},{row.upper!r},"
            f"{row.mean_mrs!r},{row.lower_mrs!r},{row.upper_mrs!r}")
    _write_atomic(Path(args.out), "\n".join(lines) + "\n")
    return 0


def _density_text(grids_by_source) -> str:
    lines = ["source,coefficient,center,density,width"]
    for source, grids in grids_by_source:
        for name, grid in grids.items():
            for center, density, width in zip(grid.centers, grid.density, grid.widths):
                lines.append(f"{source},{name},{float(center)!r},{float(density)!r},{float(width)!r}")
    return "\n".join(lines) + "\n"


def cmd_density(args) -> int:
    if args.ma:
        with open(args.ma, "r", encoding="utf-8") as fh:
            ma = MAResult.from_json(fh.read())
        fits = _load_fits(args.fits)
        draws = sample_ma_unconditionals(ma, fits, args.samples, args.seed)
        source = "ma"
    else:
        fit = _load_fits([args.fit])[0]
        draws = sample_unconditionals(fit, args.samples, args.seed)
        source = Path(args.fit).stem.removeprefix("fit_")
    grids = density_grid(draws, n_bins=args.bins)
    _write_atomic(Path(args.out), _density_text([(source, grids)]))
    return 0


def cmd_replicate_sim(args) -> int:
    out = Path(args.out)
    cmd_simulate(args)

    config = _load_config(Path(out, "runconfig.json"))
    dataset = _load_dataset(Path(out, "dataset.csv"), config)

    rows = []
    fits: dict[str, FitResult] = {}
    for family in BATCH_FAMILIES:
        fit = _fit_one(dataset, config, family, args)
        fits[family] = fit
        rows.append((family, fit))
        _write_atomic(Path(out, f"fit_{family}.json"), fit.to_json())
        print(f"{family}: status={fit.convergence.status} ll={fit.ll:.4f} "
              f"aic={fit.aic:.4f}")

    group = list(MA_GROUP_DEFAULT) + (["at"] if args.include_at else [])
    group = [f for f in group if fits[f].convergence.status != "line_search_failure"]
    ma = average([fits[f] for f in group], model_ids=group,
                 settings=MaximizeSettings(seed=args.seed))
    _write_atomic(Path(out, "ma.json"), ma.to_json())
    weight_lines = ["model,theta,pi"]
    weight_lines += [f"{mid},{float(theta)!r},{float(pi)!r}" for mid, theta, pi in
                     zip(ma.model_ids, ma.theta, ma.pi)]
    _write_atomic(Path(out, "ma_weights.csv"), "\n".join(weight_lines) + "\n")
    rows.append(("ma", ma))
    _write_atomic(Path(out, "summary.csv"), _summary_text(rows))
    print(f"ma: ll={ma.ll_ma:.4f} aic_conservative={ma.aic_conservative:.4f}")

    share_rows = [(family, predict_shares(fits[family], dataset))
                  for family in BATCH_FAMILIES]
    group_shares = [dict(share_rows)[f] for f in group]
    share_rows.append(("ma", ma_shares(ma, group_shares)))
    _write_atomic(Path(out, "shares.csv"), _shares_text(share_rows))

    normal_draws = sample_unconditionals(fits["normal"], args.samples, args.seed + 1000)
    ma_draws = sample_ma_unconditionals(ma, [fits[f] for f in group], args.samples,
                                        args.seed + 2000)
    normal_grids = density_grid(normal_draws, n_bins=args.bins)
    ma_grids = density_grid(ma_draws, n_bins=args.bins)
    truth_grids = read_truth_grids(Path(out, "truth_density.csv"))
    _write_atomic(Path(out, "density.csv"), _density_text(
        [("truth", truth_grids), ("normal", normal_grids), ("ma", ma_grids)]))

    lines = ["coefficient,l1_normal,l1_ma"]
    for name, truth in truth_grids.items():
        l1_normal = recovery_score(normal_grids[name], truth)
        l1_ma = recovery_score(ma_grids[name], truth)
        lines.append(f"{name},{l1_normal!r},{l1_ma!r}")
    _write_atomic(Path(out, "recovery.csv"), "\n".join(lines) + "\n")
    print(f"pipeline outputs in {out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _positive(name):
    def check(raw):
        value = int(raw)
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {raw}")
        return value
    return check


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefmix",
        description="Panel mixed logit with flexible mixing distributions "
                    "and model averaging")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get("PREFMIX_OUT")

    def add_out(p, required=True):
        p.add_argument("--out", default=default_out,
                       required=required and default_out is None,
                       help="output directory or file (default: $PREFMIX_OUT)")

    p = sub.add_parser("simulate", help="generate the simulated drug-choice dataset")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--persons", type=_positive("persons"), default=1000)
    p.add_argument("--tasks", type=_positive("tasks"), default=10)
    p.add_argument("--draws", type=_positive("draws"), default=500,
                   help="recorded in the emitted run config")
    add_out(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="fit one mixing family or all eight")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--family", default="all",
                   choices=("all", "fixed") + BATCH_FAMILIES)
    p.add_argument("--draws", type=_positive("draws"), default=500)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--multistart", type=_positive("multistart"), default=1)
    p.add_argument("--warm-start", action="store_true", default=True)
    p.add_argument("--no-warm-start", dest="warm_start", action="store_false")
    add_out(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("average", help="sequential latent-class model averaging")
    p.add_argument("fits", nargs="+", help="constituent fit artifacts (>= 2)")
    p.add_argument("--name", default="ma")
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("predict", help="predicted shares by sample enumeration")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--fits", nargs="+", required=True)
    p.add_argument("--ma", help="optional MA artifact for a weighted row")
    add_out(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("wtp", help="WTP summary from a WTP-space fit")
    p.add_argument("--fit", required=True)
    p.add_argument("--redraws", type=_positive("redraws"), default=200)
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_wtp)

    p = sub.add_parser("density", help="unconditional density grids")
    p.add_argument("--fit", help="fit artifact (alternative to --ma)")
    p.add_argument("--ma", help="MA artifact; requires --fits")
    p.add_argument("--fits", nargs="*", default=[], help="constituents for --ma")
    p.add_argument("--samples", type=_positive("samples"), default=100000)
    p.add_argument("--bins", type=_positive("bins"), default=100)
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("replicate-sim",
                       help="simulate + estimate batch + average + outputs")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--persons", type=_positive("persons"), default=1000)
    p.add_argument("--tasks", type=_positive("tasks"), default=10)
    p.add_argument("--draws", type=_positive("draws"), default=500)
    p.add_argument("--multistart", type=_positive("multistart"), default=1)
    p.add_argument("--warm-start", action="store_true", default=True)
    p.add_argument("--no-warm-start", dest="warm_start", action="store_false")
    p.add_argument("--include-at", action="store_true",
                   help="include the asymmetric triangular fit in the MA group")
    p.add_argument("--samples", type=_positive("samples"), default=100000)
    p.add_argument("--bins", type=_positive("bins"), default=100)
    add_out(p)
    p.set_defaults(func=cmd_replicate_sim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "density" and not args.fit and not args.ma:
        parser.error("density needs --fit or --ma")
    if args.command == "average" and len(args.fits) < 2:
        parser.error("average needs at least two fit artifacts")
    try:
        return args.func(args)
    except DataError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    except EstimationError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
