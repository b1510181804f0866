"""Command-line driver.

Subcommands: ``scan`` one model, ``calibrate`` a threshold from labeled
scores, ``evaluate`` a zoo manifest, ``synth`` a synthetic zoo to disk.
Exit codes are fixed so batch scripts can tell failure classes apart:

    0  scan completed (regardless of verdict)
    2  configuration error (bad flags, malformed files, empty input)
    3  oracle backend unavailable or transport failure
    4  insufficient samples (including a missing pool directory)
    5  calibration input contains a single class
    6  zoo manifest missing a ground-truth class

The driver itself is single threaded; --jobs only caps worker counts
inside the scan pipeline.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .boundary import plot_filename, render_image
from .detector import (
    ScanParams,
    calibrate_threshold,
    evaluate_zoo,
    scan,
)
from .errors import (
    BackendUnavailable,
    ConfigError,
    InsufficientSamples,
    ManifestError,
    ScanError,
    SingleClassInput,
    TransportError,
)
from .mxt import load_pool, save_pool
from .oracle import load_oracle
from .reporting import write_json
from .synthlab import gen_pool, gen_zoo

EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_SAMPLES = 4
EXIT_SINGLE_CLASS = 5
EXIT_MANIFEST = 6

_EXIT_BY_ERROR = (
    (ManifestError, EXIT_MANIFEST),
    (SingleClassInput, EXIT_SINGLE_CLASS),
    (InsufficientSamples, EXIT_SAMPLES),
    ((BackendUnavailable, TransportError), EXIT_BACKEND),
    (ScanError, EXIT_CONFIG),
)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def _load_json(path: str, what: str):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} is not valid JSON: {path}: {exc}") from exc


def _add_scan_params(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--plots", type=int, default=20, metavar="N",
                     help="boundary plots per model (default 20)")
    sub.add_argument("--density", type=int, default=100, metavar="S",
                     help="grid cells per axis (default 100)")
    sub.add_argument("--eta", type=float, default=5.0,
                     help="bounds expansion factor (default 5)")
    sub.add_argument("--alpha", type=float, default=10.0,
                     help="entropy order (default 10)")
    sub.add_argument("--t", type=float, default=0.5,
                     help="anchor-area cap for the ATS metric (default 0.5)")
    sub.add_argument("--seed", type=int, default=0,
                     help="master seed for triplet sampling (default 0)")
    sub.add_argument("--clamp", type=float, nargs=2, metavar=("LO", "HI"),
                     default=None, help="clamp probe coordinates to [LO, HI]")
    sub.add_argument("--distinct-labels", type=_parse_bool, default=True,
                     metavar="BOOL",
                     help="require 3 distinct predicted classes per triplet")
    sub.add_argument("--threshold-re", type=float, default=None,
                     help="entropy verdict threshold (omit for no verdict)")
    sub.add_argument("--threshold-ats", type=float, default=None,
                     help="anchor-area verdict threshold")
    sub.add_argument("--jobs", type=int, default=1,
                     help="worker thread cap (default 1)")


def _params_from(args: argparse.Namespace) -> ScanParams:
    return ScanParams(
        n_plots=args.plots,
        density=args.density,
        eta=args.eta,
        alpha=args.alpha,
        t=args.t,
        seed=args.seed,
        distinct_labels=args.distinct_labels,
        clamp=None if args.clamp is None else (args.clamp[0], args.clamp[1]),
    )


def cmd_scan(args: argparse.Namespace) -> int:
    config = _load_json(args.oracle, "oracle config")
    if not isinstance(config, dict):
        raise ConfigError("oracle config must be a JSON object")
    pool_dir = Path(args.pool)
    if not pool_dir.is_dir():
        raise InsufficientSamples(f"pool directory not found: {args.pool}")
    oracle = load_oracle(config)
    samples, labels = load_pool(pool_dir)
    model_id = str(config.get("id", Path(args.oracle).stem))
    params = _params_from(args)

    map_sink = None
    if args.render is not None:
        render_root = Path(args.render)

        def map_sink(k, bmap):
            path = render_root / plot_filename(model_id, k)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(render_image(bmap))

    report = scan(
        oracle,
        (samples, labels),
        params,
        threshold_re=args.threshold_re,
        threshold_ats=args.threshold_ats,
        model_id=model_id,
        jobs=args.jobs,
        map_sink=map_sink,
    )
    write_json(Path(args.out), report.to_dict())
    print(f"model: {model_id}")
    print(f"mean_re: {_fmt(report.aggregate.mean_re)}")
    print(f"mean_ats: {_fmt(report.aggregate.mean_ats)}")
    print(f"verdict_re: {report.verdict_re or 'n/a'}")
    print(f"verdict_ats: {report.verdict_ats or 'n/a'}")
    target = report.target_label
    print(f"target_label: {'none' if target is None else target}")
    return 0


def _read_scores(path: str) -> tuple[list[float], list[bool]]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"score table not found: {path}")
    scores: list[float] = []
    flags: list[bool] = []
    with p.open(newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                score = float(row[0])
            except ValueError:
                # tolerate a single header row
                if not scores:
                    continue
                raise ConfigError(f"bad score value {row[0]!r} in {path}")
            if len(row) < 2:
                raise ConfigError(f"row {row!r} lacks an is_backdoor column")
            flags.append(_parse_bool(row[1]))
            scores.append(score)
    if not scores:
        raise ConfigError(f"score table is empty: {path}")
    return scores, flags


def cmd_calibrate(args: argparse.Namespace) -> int:
    scores, flags = _read_scores(args.scores)
    result = calibrate_threshold(
        scores, flags, resamples=args.resamples, seed=args.seed
    )
    write_json(
        Path(args.out),
        {
            "gamma_bar": result.gamma_bar,
            "f1_at_gamma": result.f1_at_gamma,
            "n_candidates": result.n_candidates,
            "resamples": result.resamples,
            "sweep": [{"gamma": g, "f1": f} for g, f in result.sweep],
        },
    )
    print(f"gamma_bar: {_fmt(result.gamma_bar)}")
    print(f"f1: {_fmt(result.f1_at_gamma)}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    manifest = _load_json(args.manifest, "zoo manifest")
    if not isinstance(manifest, list):
        raise ConfigError("zoo manifest must be a JSON array")
    base = Path(args.manifest).parent
    for entry in manifest:
        if "pool" in entry and not Path(entry["pool"]).is_absolute():
            entry["pool"] = str(base / entry["pool"])
    table = evaluate_zoo(
        manifest,
        _params_from(args),
        threshold_re=args.threshold_re,
        threshold_ats=args.threshold_ats,
        jobs=args.jobs,
    )
    write_json(Path(args.out), table)
    print(f"auroc_re: {_fmt(table['auroc_re'])}")
    print(f"auroc_ats: {_fmt(table['auroc_ats'])}")
    acc = table["target_id_accuracy"]
    print(f"target_id_accuracy: {'n/a' if acc is None else _fmt(acc)}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    out = Path(args.out)
    entries = gen_zoo(
        args.seed,
        args.clean,
        args.backdoor,
        n=args.n,
        d=args.d,
        strength=args.strength,
    )
    manifest = []
    for entry in entries:
        write_json(out / "configs" / f"{entry.model_id}.json", entry.config)
        oracle = load_oracle(entry.config)
        pool = gen_pool(oracle.model, seed=entry.pool_seed)
        save_pool(out / "pools" / entry.model_id, pool.samples, pool.labels)
        manifest.append(entry.to_manifest(pool_path=f"pools/{entry.model_id}"))
    write_json(out / "manifest.json", manifest)
    print(f"wrote {len(entries)} oracle configs and pools under {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundaryscan",
        description="Black-box backdoor scanner over decision-boundary maps.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_scan = subs.add_parser("scan", help="scan one oracle for a backdoor")
    p_scan.add_argument("--oracle", required=True,
                        help="oracle config JSON path")
    p_scan.add_argument("--pool", required=True,
                        help="clean sample pool directory")
    _add_scan_params(p_scan)
    p_scan.add_argument("--render", metavar="DIR", default=None,
                        help="also write boundary-map PNGs under DIR")
    p_scan.add_argument("--out", default="report.json",
                        help="report path (default report.json)")
    p_scan.set_defaults(func=cmd_scan)

    p_cal = subs.add_parser("calibrate",
                            help="fit a verdict threshold from labeled scores")
    p_cal.add_argument("--scores", required=True,
                       help="CSV of score,is_backdoor rows")
    p_cal.add_argument("--resamples", type=int, default=1,
                       help="bootstrap resamples (default 1 = plain sweep)")
    p_cal.add_argument("--seed", type=int, default=0)
    p_cal.add_argument("--out", default="calibration.json")
    p_cal.set_defaults(func=cmd_calibrate)

    p_eval = subs.add_parser("evaluate", help="scan a whole zoo manifest")
    p_eval.add_argument("--manifest", required=True,
                        help="zoo manifest JSON path")
    _add_scan_params(p_eval)
    p_eval.add_argument("--out", default="evaluation.json")
    p_eval.set_defaults(func=cmd_evaluate)

    p_synth = subs.add_parser("synth",
                              help="generate a synthetic oracle zoo on disk")
    p_synth.add_argument("--clean", type=int, required=True,
                         help="number of clean oracles")
    p_synth.add_argument("--backdoor", type=int, required=True,
                         help="number of backdoored oracles")
    p_synth.add_argument("--n", type=int, default=10, help="classes")
    p_synth.add_argument("--d", type=int, default=3072, help="input dimension")
    p_synth.add_argument("--strength", type=float, default=0.8,
                         help="backdoor strength in (0, 1]")
    p_synth.add_argument("--seed", type=int, default=1)
    p_synth.add_argument("--out", default="zoo", help="output directory")
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for err_type, code in _EXIT_BY_ERROR:
            if isinstance(exc, err_type):
                return code
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
