"""Command-line entry point.

Exit codes: 0 success, 1 validation errors found, 2 usage errors.
All output is deterministic for fixed inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import dataset as ds
from . import geo, report, snippets, synth
from .errors import WalksenseError
from .instance import load_instance, validate_instance
from .segmentation import (
    SegmentationParams,
    detect_pauses,
    detect_turns,
    pause_to_dict,
    turn_to_dict,
)
from .server import ServeConfig, serve
from .taxonomy import load_taxonomy

USAGE_ERROR = 2
VALIDATION_ERROR = 1


def _fail_usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return USAGE_ERROR


def cmd_validate(args) -> int:
    inst = load_instance(args.dir)
    rep = validate_instance(inst, profile=args.profile)
    for entry in rep.entries:
        print(f"{entry.severity}: {entry.code}: {entry.message}")
    if rep.empty:
        print(f"ok: {inst.instance_id} satisfies profile {args.profile!r}")
    return 0 if rep.passed else VALIDATION_ERROR


def _summaries_for_root(root: Path):
    index = ds.scan_dataset(root)
    instances = ds.load_dataset(index)
    return instances, [geo.summarize_instance(i) for i in instances]


def cmd_summarize(args) -> int:
    root = Path(args.root)
    if (root / "metadata.json").is_file():
        rows = [geo.summarize_instance(load_instance(root))]
    else:
        _, rows = _summaries_for_root(root)
    if not rows:
        return _fail_usage(f"no instances under {args.root}")
    cities = geo.city_summaries(rows)
    sys.stdout.write(geo.format_summary(cities, fmt=args.format))
    return 0


def cmd_segment(args) -> int:
    inst = load_instance(args.dir)
    params = SegmentationParams()
    if args.params:
        with open(args.params, encoding="utf-8") as fh:
            params = SegmentationParams(**json.load(fh))
    wanted_pauses = args.pauses or not args.turns
    wanted_turns = args.turns or not args.pauses
    doc = {"instance_id": inst.instance_id}
    if wanted_pauses:
        doc["pauses"] = [pause_to_dict(p) for p in detect_pauses(inst, params)]
    if wanted_turns:
        doc["turns"] = [turn_to_dict(t) for t in detect_turns(inst, params)]
    print(json.dumps(doc, indent=2))
    return 0


def cmd_snippet(args) -> int:
    if args.end <= args.start:
        return _fail_usage("invalid interval: --end must exceed --start")
    inst = load_instance(args.dir)
    options = snippets.SnippetOptions(cut_video=not args.no_video)
    snip = snippets.extract_snippet(inst, args.start, args.end, args.out,
                                    options)
    print(json.dumps(snip.manifest, indent=2))
    return 0


def cmd_geojson(args) -> int:
    path = Path(args.path)
    if (path / "metadata.json").is_file():
        doc = geo.to_geojson(load_instance(path), out=args.out)
    else:
        index = ds.scan_dataset(path)
        doc = geo.to_geojson(ds.load_dataset(index), out=args.out)
    if args.out is None:
        print(json.dumps(doc, indent=2))
    else:
        print(f"wrote {len(doc['features'])} feature(s) to {args.out}")
    return 0


def cmd_synth(args) -> int:
    config = (synth.config_from_file(args.config) if args.config
              else synth.default_config())
    truth = synth.generate_synthetic(config, args.out)
    print(f"generated {len(truth.instances)} instance(s) under {args.out}")
    return 0


def cmd_bundle(args) -> int:
    inst = load_instance(args.dir)
    out = ds.export_bundle(inst, args.out)
    print(f"bundle written to {out}")
    return 0


def cmd_taxonomy(args) -> int:
    tax = load_taxonomy()
    if args.json:
        print(json.dumps(tax.to_dict(), indent=2, ensure_ascii=False))
    else:
        for category, leaf in tax.leaves():
            print(f"{category}/{leaf}")
    return 0


def cmd_serve(args) -> int:
    config = ServeConfig(root=args.root, port=args.port,
                         read_only=args.read_only, ui_dir=args.ui)
    serve(config)
    return 0


def cmd_report(args) -> int:
    target = Path(args.target)
    out = Path(args.out)
    if (target / "metadata.json").is_file():
        made = report.instance_report(load_instance(target), out)
    else:
        instances, rows = _summaries_for_root(target)
        if not rows:
            return _fail_usage(f"no instances under {args.target}")
        csv_text = geo.format_summary(geo.city_summaries(rows), fmt="csv")
        made = report.dataset_report(instances, csv_text, out)
    for path in made:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walksense",
        description="Load, validate, segment, summarize and serve "
                    "multimodal walk recordings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check one instance directory")
    p.add_argument("dir")
    p.add_argument("--profile", choices=["paper", "lenient"], default="paper")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("summarize", help="per-city summary table with All row")
    p.add_argument("root")
    p.add_argument("--format", choices=["csv", "json", "md"], default="csv")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("segment", help="detect pauses and turns")
    p.add_argument("dir")
    p.add_argument("--pauses", action="store_true")
    p.add_argument("--turns", action="store_true")
    p.add_argument("--params", help="JSON file of segmentation parameters")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("snippet", help="cut a time interval into a new instance")
    p.add_argument("dir")
    p.add_argument("--start", type=int, required=True, metavar="MS")
    p.add_argument("--end", type=int, required=True, metavar="MS")
    p.add_argument("--out", required=True)
    p.add_argument("--no-video", action="store_true")
    p.set_defaults(func=cmd_snippet)

    p = sub.add_parser("geojson", help="export LineString features")
    p.add_argument("path", help="instance directory or dataset root")
    p.add_argument("--out")
    p.set_defaults(func=cmd_geojson)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", help="JSON or TOML generator config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bundle", help="export the UI bundle for an instance")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bundle)

    p = sub.add_parser("taxonomy", help="print the sidewalk vocabulary")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("serve", help="HTTP API for the annotation UI")
    p.add_argument("root")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--read-only", action="store_true")
    p.add_argument("--ui", help="directory of built UI files to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="figures + delimited outputs")
    p.add_argument("target", help="instance directory or dataset root")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WalksenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
