"""Command line entry point: ``kernseg run|dump|sweep|dump-case``."""
from __future__ import annotations

import argparse
import csv
import itertools
import logging
import sys
from pathlib import Path

import numpy as np

from .benchfuncs import CASES, get_case, synthesize_sites
from .config import ConfigError, PipelineConfig, load_config
from .geometry import read_points_csv
from .pipeline import ARTIFACTS, PhaseError, run_case, run_data, write_all

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# flag name -> (config key, type)
OVERRIDES = {
    "--kernel": ("kernel", str),
    "--delta": ("delta", float),
    "--n-neighbors": ("n_neighbors", int),
    "--m-candidates": ("m_candidates", int),
    "--threshold-factor": ("threshold_factor", float),
    "--retry-factor": ("retry_factor", float),
    "--min-component-size": ("min_component_size", int),
    "--indicator": ("indicator", str),
    "--blowup-mode": ("blowup_mode", str),
    "--safe-sets": ("safe_sets", str),
    "--grid-step": ("grid_step", float),
    "--seed": ("seed", int),
    "--N": ("N", int),
    "--margin": ("margin", float),
    "--target-q": ("target_q", float),
    "--jitter": ("jitter", float),
    "--workers": ("workers", int),
}


def _add_run_options(p: argparse.ArgumentParser, data: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--case", choices=sorted(CASES), help="benchmark function")
    if data:
        src.add_argument("--data", type=Path, help="CSV with header x,y,f")
    p.add_argument("--config", type=Path, help="JSON file of config keys")
    for flag, (key, typ) in OVERRIDES.items():
        p.add_argument(flag, dest=key, type=typ, default=None)
    p.add_argument("--skip-phase3", dest="skip_phase3", action="store_true", default=None)


def _config(args) -> PipelineConfig:
    overrides = {key: getattr(args, key, None) for key, _ in OVERRIDES.values()}
    overrides["skip_phase3"] = getattr(args, "skip_phase3", None)
    return load_config(args.config, **overrides)


def _run(args, cfg: PipelineConfig):
    if args.case:
        return run_case(cfg, args.case)
    coords, values = read_points_csv(args.data)
    if values is None:
        raise ConfigError(f"{args.data}: column f is required")
    return run_data(cfg, coords, values)


def cmd_run(args) -> int:
    cfg = _config(args)
    res = _run(args, cfg)
    for path in write_all(res, args.out):
        logging.info("wrote %s", path)
    rep = res.report
    print(
        f"J={res.partition.J} classified_after_blowup={res.summary()['classified_after_blowup']}"
        f" linf_safe={rep.linf_safe_segmented} linf={rep.linf_segmented}"
        f" global_safe={rep.linf_safe_global} global={rep.linf_global}"
    )
    return EXIT_OK


def cmd_dump(args) -> int:
    cfg = _config(args)
    res = _run(args, cfg)
    _, writer = ARTIFACTS[args.artifact]
    if args.output is None or str(args.output) == "-":
        writer(res, sys.stdout)
    else:
        with open(args.output, "w", newline="") as fh:
            writer(res, fh)
    return EXIT_OK


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


SWEEP_FIELDS = [
    "n_neighbors", "delta", "threshold_factor", "J", "classified_after_blowup",
    "n_misclassified", "linf_safe_segmented", "linf_segmented",
    "linf_safe_global", "linf_global", "status",
]


def cmd_sweep(args) -> int:
    base = _config(args)
    ns = args.n or [base.n_neighbors]
    deltas = args.deltas or [base.delta]
    factors = args.factors or [base.threshold_factor]
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SWEEP_FIELDS)
        for n, delta, factor in itertools.product(ns, deltas, factors):
            cfg = base.with_overrides(n_neighbors=n, delta=delta, threshold_factor=factor)
            row = [n, delta, factor]
            try:
                res = run_case(cfg, args.case)
            except PhaseError as exc:
                w.writerow(row + [""] * 7 + [f"failed: {exc}"])
                continue
            s, e = res.summary(), res.report
            w.writerow(row + [
                res.partition.J, s["classified_after_blowup"], e.n_misclassified,
                e.linf_safe_segmented, e.linf_segmented, e.linf_safe_global, e.linf_global, "ok",
            ])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_dump_case(args) -> int:
    cfg = _config(args)
    case = get_case(args.case)
    ps, _ = synthesize_sites(cfg.N, cfg.margin, cfg.target_q, cfg.seed, cfg.jitter)
    f = case(ps.coords)
    tc = case.true_class(ps.coords)
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "y", "f", "true_class"])
        for (x, y), fv, c in zip(ps.coords, f, tc):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(fv)), int(c)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kernseg",
        description="Segmented kernel interpolation of scattered data with discontinuities.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run all phases and write every artifact")
    _add_run_options(p)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dump", help="run all phases and write one artifact")
    p.add_argument("artifact", choices=sorted(ARTIFACTS))
    _add_run_options(p)
    p.add_argument("-o", "--output", help="file, or - for stdout (default)")
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser("sweep", help="grid over n, delta and threshold factor")
    _add_run_options(p, data=False)
    p.add_argument("--n", type=_ints, help="comma separated neighbor counts")
    p.add_argument("--deltas", type=_floats, help="comma separated shape parameters")
    p.add_argument("--factors", type=_floats, help="comma separated threshold factors")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dump-case", help="write x,y,f,true_class for a benchmark case")
    _add_run_options(p, data=False)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dump_case)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except PhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
