"""Command line interface: ``fdhomog {depth,test,simulate,derive,replay}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.  Errors
are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .curves import finite_difference
from .depth import DepthKind, DepthSpec, compute_depth
from .errors import FdHomogError, NumericError, ParseError
from .homogeneity import StatisticKind, TestConfig, bootstrap_test_many
from .io import (
    RunManifest,
    file_digest,
    fmt_float,
    format_sample_csv,
    format_table_csv,
    load_sample_csv,
    read_manifest,
)
from .simulation import (
    SAMPLES,
    SimConfig,
    cholesky_factor,
    power_sweep,
    reproduce_null_power,
    reproduce_table1,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

DEPTH_CHOICES = [k.value for k in DepthKind]
STAT_CHOICES = [k.value for k in StatisticKind]

# preset -> table -> (replications, bootstrap)
PRESETS = {
    "paper": {"table1": (100, 1000), "table2": (100, 1000), "power": (100, 1000)},
    "desk": {"table1": (25, 500), "table2": (40, 500), "power": (40, 500)},
}
DEFAULT_ETAS = (0.0, 0.1, 0.25, 0.5, 1.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _diag(kind, message, code, **extra):
    payload = {"error": kind, "message": message, "exit_code": code, **extra}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _depth_args(p, multiple=False):
    if multiple:
        p.add_argument("--depth", nargs="+", choices=DEPTH_CHOICES, default=None)
    else:
        p.add_argument("--depth", choices=DEPTH_CHOICES, default="fm")
    p.add_argument("--bandwidth-percentile", type=float, default=15.0)
    p.add_argument("--projections", type=int, default=50)


def build_parser():
    p = _Parser(prog="fdhomog", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    d = sub.add_parser("depth", help="per-curve depths of a sample (CSV)")
    d.add_argument("sample")
    _depth_args(d)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out")

    t = sub.add_parser("test", help="bootstrap homogeneity test of two samples (JSON)")
    t.add_argument("sample_f")
    t.add_argument("sample_g")
    _depth_args(t)
    t.add_argument("--stat", nargs="+", choices=STAT_CHOICES + ["all"], default=["all"])
    t.add_argument("--bootstrap", type=int, default=1000)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")

    s = sub.add_parser("simulate", help="Gaussian-process rejection tables (CSV)")
    s.add_argument("table", choices=["table1", "table2", "power"])
    s.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    _depth_args(s, multiple=True)
    s.add_argument("--stat", nargs="+", choices=STAT_CHOICES, default=None)
    s.add_argument("--reps", type=int)
    s.add_argument("--bootstrap", type=int)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", nargs="+", type=int, choices=[1, 2, 3, 4, 5], default=[1, 2, 3, 4, 5])
    s.add_argument("--eta", nargs="+", type=float, default=list(DEFAULT_ETAS))
    s.add_argument("--curves", type=int, default=50)
    s.add_argument("--grid-size", type=int, default=30)
    s.add_argument("--swap-roles", action="store_true")
    s.add_argument("--jobs", type=int, default=1, help="worker processes; does not affect results")
    s.add_argument("--out")

    v = sub.add_parser("derive", help="discrete derivative of every curve (CSV)")
    v.add_argument("sample")
    v.add_argument("--order", type=int, default=1)
    v.add_argument("--out")

    r = sub.add_parser("replay", help="re-run the command recorded in an output's manifest")
    r.add_argument("artifact")
    r.add_argument("--out")
    r.add_argument("--jobs", type=int, default=1)
    return p


def _spec(args, kind=None, seed=0):
    return DepthSpec(
        kind=kind or args.depth,
        bandwidth_percentile=args.bandwidth_percentile,
        projections=args.projections,
        rng_seed=seed,
    )


def _manifest(command, argv, config, seed=None, inputs=(), metadata=None):
    return RunManifest(
        command=command,
        argv=list(argv),
        config=config,
        seed=seed,
        inputs={str(p): file_digest(p) for p in inputs},
        metadata=metadata or {},
    )


def _strip_out(argv):
    """Drop output and parallelism flags; they do not change results."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in ("--out", "--jobs"):
            skip = True
            continue
        if a.startswith("--out=") or a.startswith("--jobs="):
            continue
        out.append(a)
    return out


def cmd_depth(args, argv):
    sample = load_sample_csv(args.sample)
    spec = _spec(args, seed=args.seed)
    depth = compute_depth(sample, spec)
    man = _manifest("depth", argv, {"depth": spec.to_dict()}, args.seed, [args.sample])
    labels = sample.labels or [""] * sample.n
    rows = [{"index": i, "label": labels[i], "depth": float(v)} for i, v in enumerate(depth.values)]
    _emit(format_table_csv(["index", "label", "depth"], rows, man), args.out)


def _verdict_table(results, depth):
    lines = [f"{'depth':<8}{'stat':<6}{'value':>14}{'CV':>14}  Rej."]
    for res in results:
        lines.append(
            f"{depth:<8}{res.statistic.value.upper():<6}{res.observed:>14.6g}"
            f"{res.critical_value:>14.6g}  {'Yes' if res.reject else 'No'}"
        )
    return "\n".join(lines) + "\n"


def cmd_test(args, argv):
    F = load_sample_csv(args.sample_f)
    G = load_sample_csv(args.sample_g)
    kinds = list(StatisticKind) if "all" in args.stat else [StatisticKind(s) for s in args.stat]
    cfg = TestConfig(
        bootstrap=args.bootstrap,
        alpha=args.alpha,
        rng_seed=args.seed,
        depth=_spec(args, seed=args.seed),
        statistic=kinds[0],
    )
    res = bootstrap_test_many(F, G, cfg, kinds)
    results = [res[k] for k in kinds]
    config = cfg.to_dict()
    config["statistics"] = [k.value for k in kinds]
    man = _manifest("test", argv, config, args.seed, [args.sample_f, args.sample_g])
    doc = {"manifest": man.to_dict(), "results": [r.to_dict() for r in results]}
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    sys.stderr.write(_verdict_table(results, args.depth))


def cmd_simulate(args, argv):
    reps, boot = PRESETS[args.preset][args.table]
    reps = args.reps or reps
    boot = args.bootstrap or boot
    sim = SimConfig(
        grid_size=args.grid_size,
        curves_per_sample=args.curves,
        replications=reps,
        test=TestConfig(bootstrap=boot, alpha=args.alpha, rng_seed=args.seed),
        swap_roles=args.swap_roles,
        n_jobs=args.jobs,
    )
    if args.table == "power":
        depths = [_spec(args, kind=k) for k in (args.depth or ["fm"])]
        stats = [StatisticKind(s) for s in (args.stat or ["p1"])]
    else:
        depths = [_spec(args, kind=k) for k in (args.depth or DEPTH_CHOICES)]
        stats = [StatisticKind(s) for s in (args.stat or STAT_CHOICES)]

    pops = [SAMPLES[0]]
    if args.table == "table1":
        pops += [SAMPLES[i] for i in args.samples]
    jitter = max(cholesky_factor(p, sim.grid)[1] for p in pops)

    if args.table == "table1":
        rows = reproduce_table1(depths, stats, sim, args.samples)
        cols = ["depth", "sample", "statistic", "rejections", "replications"]
    elif args.table == "table2":
        rows = reproduce_null_power(depths, stats, sim)
        cols = ["depth", "statistic", "rejections", "replications", "rate"]
    else:
        rows = []
        for depth in depths:
            for k in stats:
                counts = power_sweep(args.eta, depth, k, sim)
                for eta, c in zip(args.eta, counts):
                    rows.append(
                        {
                            "depth": depth.kind.value,
                            "statistic": k.value,
                            "eta": float(eta),
                            "rejections": c,
                            "replications": reps,
                            "rate": c / reps,
                        }
                    )
        cols = ["depth", "statistic", "eta", "rejections", "replications", "rate"]

    config = sim.to_dict()
    config.update(
        table=args.table,
        preset=args.preset,
        depths=[d.to_dict() for d in depths],
        statistics=[k.value for k in stats],
    )
    if args.table == "table1":
        config["samples"] = list(args.samples)
    if args.table == "power":
        config["etas"] = [float(e) for e in args.eta]
    man = _manifest("simulate", argv, config, args.seed, metadata={"cholesky_jitter": jitter})
    _emit(format_table_csv(cols, rows, man), args.out)


def cmd_derive(args, argv):
    sample = load_sample_csv(args.sample)
    out = finite_difference(sample, args.order)
    man = _manifest("derive", argv, {"order": args.order}, None, [args.sample])
    _emit(format_sample_csv(out, man), args.out)


def cmd_replay(args, argv):
    man = read_manifest(args.artifact)
    for path, digest in man.inputs.items():
        if not Path(path).exists() or file_digest(path) != digest:
            raise ParseError(f"input {path} is missing or differs from the recorded digest")
    replay_argv = list(man.argv)
    if args.out:
        replay_argv += ["--out", args.out]
    if man.command == "simulate" and args.jobs > 1:
        replay_argv += ["--jobs", str(args.jobs)]
    return main(replay_argv)


COMMANDS = {
    "depth": cmd_depth,
    "test": cmd_test,
    "simulate": cmd_simulate,
    "derive": cmd_derive,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _diag("UsageError", str(exc), EXIT_USAGE)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        rc = COMMANDS[args.command](args, _strip_out(argv))
    except NumericError as exc:
        return _diag(type(exc).__name__, str(exc), EXIT_NUMERIC)
    except ParseError as exc:
        return _diag(type(exc).__name__, str(exc), EXIT_DATA, row=exc.row, column=exc.column)
    except (FdHomogError, OSError, UnicodeDecodeError) as exc:
        return _diag(type(exc).__name__, str(exc), EXIT_DATA)
    return EXIT_OK if rc is None else rc


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
