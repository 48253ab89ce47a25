"""Command-line experiment runner.

    specmon run    [--config FILE] [flags]          one cell, or a sweep from the config file
    specmon sweep  --axis AXIS --values V1,V2,...   shorthand for a sweep run
    specmon params [flags]                          print the default parameter table

Outputs, all under ``--out`` (default ``results``):

    trials.csv     one row per (cell, trial)
    aggregate.csv  one row per cell: means and sample standard deviations
    cdf.csv        first-detection CDF points per cell
    matrices/      reward matrices, with ``--dump-matrix``

Exit status: 0 on success, 2 on an invalid configuration, 3 on an I/O error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .adversary import KINDS, init_adversary
from .algorithms import VARIANTS, build_covering_set, variant_name
from .core import ConfigError, HorizonTooSmallError, SimConfig, enumerate_strategies
from .metrics import SUMMARY_FIELDS, aggregate
from .runner import child_seed, default_params, resolve_params, run_trial, streams

DETAIL_COLUMNS = (
    "variant", "adversary", "K", "l", "r", "unit_cost", "p_d", "M", "T",
    "tau", "gamma", "eta", "beta", "trial", "seed",
    "G_alg", "L_alg", "U_alg", "G_best", "U_best",
    "weak_regret", "normalized_regret", "first_detection_slot",
)
CELL_COLUMNS = DETAIL_COLUMNS[:13]
AXES = ("T", "tau-exp", "pd", "l", "M", "adversary")

# config-file key -> (SimConfig field, parser)
_SIM_KEYS = {
    "K": ("K", int), "l": ("l", int), "r": ("r", float), "cost": ("unit_switch_cost", float),
    "pd": ("p_d", float), "mus": ("M", int), "T": ("T", int), "delta": ("delta", float),
    "seed": ("seed", int), "trials": ("trials", int),
}
_OVERRIDES = {"tau": int, "gamma": float, "eta": float, "beta": float}


@dataclass
class ExperimentSpec:
    config: SimConfig = field(default_factory=SimConfig)
    variants: tuple = ("III",)
    adversary: str = "adaptive"
    overrides: dict = field(default_factory=dict)
    axis: str | None = None
    values: tuple = ()
    out: str = "results"
    workers: int = 1
    dump_matrix: bool = False

    def cells(self):
        """Sweep cells as ``(variant, config, adversary, overrides)``, axis value outer."""
        values = self.values if self.axis else (None,)
        out = []
        for value in values:
            cfg, kind, ov = self.config, self.adversary, dict(self.overrides)
            if self.axis == "T":
                cfg = replace(cfg, T=int(value))
            elif self.axis == "pd":
                cfg = replace(cfg, p_d=float(value))
            elif self.axis == "l":
                cfg = replace(cfg, l=int(value))
            elif self.axis == "M":
                cfg = replace(cfg, M=int(value))
            elif self.axis == "adversary":
                kind = str(value)
            elif self.axis == "tau-exp":
                ov["tau"] = tau_for_exponent(cfg.T, float(value))
            for v in self.variants:
                out.append((v, cfg, kind, ov))
        return out


def tau_for_exponent(T, exponent):
    """Batch size round(T ** (1 / exponent)), clamped to [1, T]."""
    if exponent <= 0:
        raise ConfigError(f"tau exponent must be positive, got {exponent}")
    return min(max(int(math.floor(T ** (1 / exponent) + 0.5)), 1), T)


def read_config_file(path):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            values[key.strip().replace("_", "-")] = value.strip()
    return values


def _split(value):
    return tuple(v.strip() for v in str(value).split(",") if v.strip())


def build_spec(args):
    """Merge config-file values with command-line flags (flags win)."""
    raw = read_config_file(args.config) if args.config else {}
    for key in list(_SIM_KEYS) + list(_OVERRIDES) + ["adversary", "out", "workers", "axis", "values"]:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            raw[key] = flag
    if args.variant:
        raw["variant"] = ",".join(args.variant)
    if getattr(args, "dump_matrix", False):
        raw["dump-matrix"] = "true"

    known = set(_SIM_KEYS) | set(_OVERRIDES) | {
        "variant", "adversary", "out", "workers", "axis", "values", "dump-matrix"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")

    try:
        sim = {name: conv(raw[key]) for key, (name, conv) in _SIM_KEYS.items() if key in raw}
        overrides = {k: conv(raw[k]) for k, conv in _OVERRIDES.items() if k in raw}
        workers = int(raw.get("workers", 1))
    except ValueError as exc:
        raise ConfigError(f"malformed value: {exc}") from None
    config = SimConfig(**sim)

    default_variants = {"sweep": ("II", "III"), "params": VARIANTS}.get(args.command, ("III",))
    variants = tuple(variant_name(v) for v in _split(raw.get("variant", ""))) or default_variants
    adversary = str(raw.get("adversary", "adaptive")).lower()
    if adversary not in KINDS:
        raise ConfigError(f"unknown adversary {adversary!r}; expected one of {', '.join(KINDS)}")

    axis = raw.get("axis")
    values = _split(raw.get("values", ""))
    if axis is not None and axis not in AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(AXES)}")
    if axis and not values:
        raise ConfigError(f"sweep axis {axis!r} needs a non-empty value list")
    if values and not axis:
        raise ConfigError("sweep values given without a sweep axis")
    if axis == "tau-exp" and "tau" in overrides:
        raise ConfigError("a tau override conflicts with a tau-exp sweep")
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    return ExperimentSpec(
        config=config, variants=variants, adversary=adversary, overrides=overrides,
        axis=axis, values=values, out=str(raw.get("out", "results")), workers=workers,
        dump_matrix=str(raw.get("dump-matrix", "false")).lower() in ("1", "true", "yes"),
    )


def validate_cells(cells):
    """Fail fast, before any simulation, on any cell that cannot run."""
    for variant, cfg, kind, ov in cells:
        try:
            cfg = SimConfig(**asdict(cfg))
        except ConfigError as exc:
            raise ConfigError(f"cell {variant}/{kind}: {exc}") from None
        rng = streams(0)
        space = enumerate_strategies(cfg.K, cfg.l)
        covering = build_covering_set(space, rng.covering)
        resolve_params(variant, space, covering, cfg, ov)
        init_adversary(kind, cfg, rng.adversary)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _run_one(task):
    cell, trial, variant, cfg, kind, ov, master, dump_dir = task
    seed = child_seed(master, cell, trial)
    res = run_trial(cfg, variant, kind, seed, ov)
    if dump_dir:
        dump_matrix(os.path.join(dump_dir, f"cell{cell:03d}_trial{trial:04d}.csv"),
                    res.trace.matrix)
    p, rep = res.params, res.report
    row = dict(
        variant=variant, adversary=kind, K=cfg.K, l=cfg.l, r=cfg.r,
        unit_cost=cfg.unit_switch_cost, p_d=cfg.p_d, M=cfg.M, T=cfg.T,
        tau=p.tau, gamma=p.gamma, eta=p.eta, beta=p.beta, trial=trial, seed=seed,
        G_alg=rep.G_alg, L_alg=rep.L_alg, U_alg=rep.U_alg, G_best=rep.G_best,
        U_best=rep.U_best, weak_regret=rep.weak_regret,
        normalized_regret=rep.normalized_regret,
        first_detection_slot=rep.first_detection_slot,
    )
    return cell, row, rep


def dump_matrix(path, matrix):
    """Write a T x K reward matrix; columns are 1-based channel numbers."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"ch{k + 1}" for k in range(matrix.shape[1])])
        w.writerows([[_fmt(float(v)) for v in row] for row in matrix])


def execute(spec):
    """Run every (cell, trial) and return ``(rows, per-cell reports)`` in order."""
    cells = spec.cells()
    validate_cells(cells)
    dump_dir = os.path.join(spec.out, "matrices") if spec.dump_matrix else None
    if dump_dir:
        os.makedirs(dump_dir, exist_ok=True)
    tasks = [
        (c, i, v, cfg, kind, ov, spec.config.seed, dump_dir)
        for c, (v, cfg, kind, ov) in enumerate(cells)
        for i in range(cfg.trials)
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=8))
    else:
        results = [_run_one(t) for t in tasks]

    rows = [row for _, row, _ in results]
    reports = [[] for _ in cells]
    cell_rows = [None] * len(cells)
    for c, row, rep in results:
        reports[c].append(rep)
        cell_rows[c] = cell_rows[c] or row
    return rows, cell_rows, reports


def aggregate_rows(cell_rows, reports):
    agg, cdf = [], []
    for c, (first, reps) in enumerate(zip(cell_rows, reports)):
        summary = aggregate(reps)
        row = {"cell": c, **{k: first[k] for k in CELL_COLUMNS}, "trials": summary.n}
        for name in SUMMARY_FIELDS:
            row[f"mean_{name}"] = summary.mean[name]
            row[f"std_{name}"] = summary.std[name]
        row["median_first_detection_slot"] = summary.quantile(0.5)
        row["never_detected_fraction"] = summary.never_detected
        agg.append(row)
        for slot, frac in summary.cdf:
            cdf.append({"cell": c, "variant": first["variant"], "adversary": first["adversary"],
                        "slot": slot, "fraction": frac})
    return agg, cdf


def write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def aggregate_columns():
    cols = ["cell", *CELL_COLUMNS, "trials"]
    for name in SUMMARY_FIELDS:
        cols += [f"mean_{name}", f"std_{name}"]
    return cols + ["median_first_detection_slot", "never_detected_fraction"]


def cmd_run(spec, out=None):
    out = out or sys.stdout
    rows, cell_rows, reports = execute(spec)
    agg, cdf = aggregate_rows(cell_rows, reports)
    os.makedirs(spec.out, exist_ok=True)
    write_csv(os.path.join(spec.out, "trials.csv"), rows, DETAIL_COLUMNS)
    write_csv(os.path.join(spec.out, "aggregate.csv"), agg, aggregate_columns())
    write_csv(os.path.join(spec.out, "cdf.csv"), cdf,
              ["cell", "variant", "adversary", "slot", "fraction"])
    for row in agg:
        print(f"cell {row['cell']}: variant {row['variant']:<3} {row['adversary']:<8} "
              f"T={row['T']} tau={row['tau']} mean U={row['mean_U_alg']:.2f} "
              f"mean R/T={row['mean_normalized_regret']:.5f}", file=out)
    print(f"wrote {len(rows)} trial rows and {len(agg)} aggregate rows to {spec.out}", file=out)
    return 0


def print_params(spec, out=None):
    """Default parameters for each requested variant, without running."""
    out = out or sys.stdout
    cfg = spec.config
    space = enumerate_strategies(cfg.K, cfg.l)
    covering = build_covering_set(space, streams(cfg.seed).covering)
    print(f"K={cfg.K} l={cfg.l} r={cfg.r} T={cfg.T} delta={cfg.delta}", file=out)
    print(f"S={space.S} C={covering.C}", file=out)
    print(f"{'variant':<8}{'tau':>6}{'tau_real':>12}{'gamma':>14}{'eta':>14}{'beta':>14}", file=out)
    for v in spec.variants:
        try:
            p = default_params(v, space, covering, cfg)
        except ConfigError as exc:
            print(f"{v:<8}warning: {exc}", file=out)
            continue
        cols = [p.tau_real, p.gamma, p.eta, p.beta]
        cells = "".join(f"{'-' if x is None else format(x, '.6g'):>{w}}"
                        for x, w in zip(cols, (12, 14, 14, 14)))
        print(f"{v:<8}{p.tau:>6}{cells}", file=out)
    if cfg.K >= 2:
        try:
            mu = init_adversary("adaptive", cfg, streams(cfg.seed).adversary)
            print(f"adaptive MU learner: tau={mu.tau} gamma={mu.gamma:.6g}", file=out)
        except HorizonTooSmallError as exc:
            print(f"adaptive MU learner: warning: {exc}", file=out)
    return 0


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value configuration file")
    common.add_argument("--variant", action="append", metavar="{1,2,3,4}",
                        help="algorithm variant; repeat or comma-separate for several")
    common.add_argument("--adversary", choices=KINDS)
    for flag, conv, hlp in [
        ("--T", int, "horizon in slots"), ("--K", int, "number of channels"),
        ("--l", int, "radios per monitor"), ("--r", float, "unit channel reward"),
        ("--cost", float, "switching cost per retuned radio"),
        ("--pd", float, "detection probability"), ("--mus", int, "number of malicious users"),
        ("--delta", float, "confidence parameter (variants III/IV)"),
        ("--trials", int, "trials per cell"), ("--seed", int, "master seed"),
        ("--tau", int, "override batch size"), ("--gamma", float, "override gamma"),
        ("--eta", float, "override eta"), ("--beta", float, "override beta"),
        ("--workers", int, "parallel worker processes"),
    ]:
        common.add_argument(flag, type=conv, help=hlp)
    common.add_argument("--out", metavar="DIR", help="output directory (default: results)")
    common.add_argument("--dump-matrix", action="store_true",
                        help="also write every trial's reward matrix")

    parser = argparse.ArgumentParser(prog="specmon", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run an experiment")
    sw = sub.add_parser("sweep", parents=[common], help="run a one-axis sweep")
    sw.add_argument("--axis", choices=AXES, required=True)
    sw.add_argument("--values", required=True, help="comma-separated axis values")
    sub.add_parser("params", parents=[common], help="print default parameters")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.command != "sweep":
            args.axis = args.values = None
        spec = build_spec(args)
        if args.command == "params":
            if spec.overrides:
                print("note: parameter overrides are ignored by 'params'", file=sys.stderr)
            return print_params(spec)
        return cmd_run(spec)
    except ConfigError as exc:
        print(f"specmon: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"specmon: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
