"""Command-line interface.

Exit status is 0 on success, 1 on data errors (missing or malformed files,
bad streams) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from contextlib import contextmanager
from typing import Sequence

from .bench import run_benchmark
from .classifier import classify, load_dataset, pca_project, projection_to_csv
from .errors import KineseqError
from .geometry import extract_features, load_angle_specs
from .matcher import generate_variants, load_dictionary, parse_tokens
from .pipeline import event_to_json, frame_from_dict, load_config, read_stream, run_stream, write_stream
from .sequencer import format_tokens
from .synth import SynthScript, build_dataset, load_poses, render_stream

log = logging.getLogger("kineseq")

BUDGET_MS = 150.0


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


@contextmanager
def _open_in(path: str | None):
    if path is None or path == "-":
        yield sys.stdin
    else:
        with open(path) as fh:
            yield fh


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with engine settings")
    p.add_argument("--frame-period-ms", type=float)
    p.add_argument("--buffer-capacity", type=int)
    p.add_argument("--null-threshold", type=float)
    p.add_argument("--separator-len", type=int)
    p.add_argument("-k", type=int, help="neighbours for kNN (default 5)")
    p.add_argument("--edit-limit", type=int)
    p.add_argument("--segment-len", type=int)
    p.add_argument("--position-scale", type=float)
    p.add_argument("--min-keypoint-score", type=float)


def _config_from_args(args):
    keys = ("frame_period_ms", "buffer_capacity", "null_threshold", "separator_len", "k",
            "edit_limit", "segment_len", "position_scale", "min_keypoint_score")
    return load_config(args.config, overrides={k: getattr(args, k) for k in keys})


def cmd_analyze(args) -> int:
    config = _config_from_args(args)
    dataset = load_dataset(args.dataset, k=config.k)
    dictionary = load_dictionary(args.dictionary)
    specs = load_angle_specs(args.angles) if args.angles else None
    with _open_out(args.output) as out, _open_in(args.input) as fh:
        on_event = None
        if args.jsonl:
            def on_event(ev):
                out.write(event_to_json(ev) + "\n")
                out.flush()
        report = run_stream(read_stream(fh), dataset, dictionary, config, specs, on_event)
        if not args.jsonl:
            out.write(report.to_json() + "\n")
    return 0


def cmd_classify(args) -> int:
    dataset = load_dataset(args.dataset, k=args.k)
    specs = load_angle_specs(args.angles) if args.angles else None
    with _open_in(args.input) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise KineseqError(f"{args.input}: invalid JSON: {exc}") from exc
    fv = extract_features(frame_from_dict(obj), specs)
    label, acc = classify(fv, dataset)
    print(json.dumps({"label": label, "accuracy": acc, "angles": list(fv.angles),
                      "angular": fv.angular, "position": fv.position}))
    return 0


def cmd_project(args) -> int:
    dataset = load_dataset(args.dataset, k=1)
    with _open_out(args.output) as out:
        out.write(projection_to_csv(pca_project(dataset)))
    return 0


def cmd_gen_variants(args) -> int:
    for v in generate_variants(parse_tokens(args.ideal), args.scales):
        print(format_tokens(v))
    return 0


def cmd_simulate(args) -> int:
    poses = load_poses(args.poses)
    script = SynthScript.parse(args.script, args.jitter, args.seed)
    frames = render_stream(script, poses, args.period, args.start)
    with _open_out(args.output) as out:
        write_stream(frames, out, jsonl=args.format == "jsonl")
    return 0


def cmd_build_dataset(args) -> int:
    poses = load_poses(args.poses)
    specs = load_angle_specs(args.angles) if args.angles else None
    text = build_dataset(poses, args.per_pose, args.jitter, args.seed, specs, args.position_scale)
    with _open_out(args.output) as out:
        out.write(text)
    return 0


def cmd_benchmark(args) -> int:
    res = run_benchmark(args.iterations, args.variants, args.buffer_len, args.seed)
    print(json.dumps({**dataclasses.asdict(res), "budget_ms": BUDGET_MS,
                      "within_budget": res.median_ms < BUDGET_MS}))
    if args.check and res.median_ms >= BUDGET_MS:
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kineseq", description="Identify and score exercise movements from keypoint streams.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="keypoint stream -> report JSON")
    p.add_argument("--dataset", required=True, help="evaluation CSV")
    p.add_argument("--dictionary", required=True, help="movement dictionary JSON")
    p.add_argument("--input", default="-", help="keypoint stream (JSON array or JSON lines); default stdin")
    p.add_argument("--output", default="-")
    p.add_argument("--angles", help="angle definition JSON (default: bundled table)")
    p.add_argument("--jsonl", action="store_true", help="emit one JSON line per event as it happens")
    _add_config_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="single frame -> label and accuracy")
    p.add_argument("--dataset", required=True)
    p.add_argument("--input", default="-", help="one frame object; default stdin")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--angles")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("project", help="dataset -> PCA plot data CSV (x, y, label)")
    p.add_argument("--dataset", required=True)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("gen-variants", help="ideal sequence + tempo scales -> variants")
    p.add_argument("--ideal", required=True, help='e.g. "A6 B6 C10 B6 A6"')
    p.add_argument("--scales", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_gen_variants)

    p = sub.add_parser("simulate", help="synthetic script -> keypoint stream")
    p.add_argument("--script", required=True, help='e.g. "A:6,B:6,C:10,N:7"; N renders NULL frames')
    p.add_argument("--jitter", type=float, default=0.0, help="pixel standard deviation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--period", type=float, default=150.0, help="ms between frames")
    p.add_argument("--start", type=float, default=0.0, help="timestamp of the first frame")
    p.add_argument("--poses", help="canonical pose JSON (default: bundled A/B/C)")
    p.add_argument("--format", choices=("json", "jsonl"), default="jsonl")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("build-dataset", help="canonical poses -> evaluation CSV")
    p.add_argument("--poses")
    p.add_argument("--per-pose", type=int, default=10)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--position-scale", type=float, default=820.0)
    p.add_argument("--angles")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("benchmark", help="per-frame latency on a full buffer")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--variants", type=int, default=400)
    p.add_argument("--buffer-len", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", action="store_true", help=f"exit 1 if the median exceeds {BUDGET_MS:g} ms")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (KineseqError, OSError, ValueError) as exc:
        print(f"kineseq {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
