"""Command-line front end: ``fmlearn <command> ...``.

Exit status is 0 on success, 1 on domain errors (invalid model, dataset
mismatch, invalid configuration passed to ``validate``) and 2 on usage
errors (unknown flags, missing files).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

from .analysis import conf_deg, delta
from .environment import dataset_to_csv, synthesize
from .errors import FmlearnError
from .evolution import (
    bundled_model,
    cloudrm_scenario,
    load_scenario,
    optional_restoration_scenario,
    save_scenario,
)
from .harness import ExperimentConfig, run_experiment
from .model import Configuration, FeatureModel, load_model


def _ids(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def _model(parser: argparse.ArgumentParser, ref: str, flag: str) -> FeatureModel:
    if ref.startswith("bundled:"):
        return bundled_model(ref.split(":", 1)[1])
    if not Path(ref).is_file():
        parser.error(f"{flag}: file not found: {ref}")
    return load_model(ref)


def _existing(parser: argparse.ArgumentParser, path: str, flag: str) -> Path:
    p = Path(path)
    if not p.is_file():
        parser.error(f"{flag}: file not found: {path}")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args, parser) -> int:
    model = _model(parser, args.model, "model")
    if args.config is None:
        print(f"{model.name}: {len(model.features)} features, {len(model.constraints)} constraints, "
              f"{model.count()} configurations")
        return 0
    ids = _ids(args.config)
    unknown = [f for f in ids if f not in model]
    config = Configuration(ids)
    if unknown:
        print(f"invalid: unknown features {unknown}")
        return 1
    if model.is_valid(config):
        print("valid")
        return 0
    print("invalid")
    return 1


def cmd_enumerate(args, parser) -> int:
    model = _model(parser, args.model, "model")
    if args.count_only:
        n = model.count()
        print(n)
        if args.out:
            Path(args.out).write_text(json.dumps({"count": n}) + "\n", encoding="utf-8")
        return 0
    configs = model.configurations()
    for c in configs:
        print(",".join(model.ids(model.mask(c.active))))
    if args.out:
        if args.out.endswith(".csv"):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(model.order)
            for c in configs:
                w.writerow([1 if f in c else 0 for f in model.order])
            Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
        else:
            doc = [model.ids(model.mask(c.active)) for c in configs]
            Path(args.out).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return 0


def cmd_degree(args, parser) -> int:
    model = _model(parser, args.model, "model")
    d = conf_deg(model, args.feature)
    print(d)
    if args.out:
        Path(args.out).write_text(json.dumps({"feature": args.feature, "degree": d}) + "\n",
                                  encoding="utf-8")
    return 0


def cmd_delta(args, parser) -> int:
    before = _model(parser, args.before, "before")
    after = _model(parser, args.after, "after")
    text = delta(before, after).to_json(listings=args.list) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_scenario(args, parser) -> int:
    if args.action == "gen":
        if args.cloudrm == (args.model is not None):
            parser.error("scenario gen: give exactly one of --model and --cloudrm")
        if not args.out:
            parser.error("scenario gen: --out <directory> is required")
        if args.cloudrm:
            scenario = cloudrm_scenario()
        else:
            scenario = optional_restoration_scenario(_model(parser, args.model, "--model"), args.seed)
        manifest = save_scenario(scenario, args.out)
        print(f"wrote {len(scenario)} models and {manifest}")
        return 0
    if args.manifest is None:
        parser.error("scenario show: a manifest path is required")
    if args.manifest == "bundled:cloudrm":
        scenario = cloudrm_scenario()
    else:
        scenario = load_scenario(_existing(parser, args.manifest, "manifest"))
    rows = []
    prev = None
    for i, (m, note) in enumerate(zip(scenario.steps, scenario.notes)):
        d = delta(prev, m) if prev is not None else None
        rows.append({"step": i, "model": m.name, "features": len(m.features), "size": m.size,
                     "added": d and len(d.added), "removed": d and len(d.removed), "note": note})
        prev = m
    print(f"# {scenario.name}")
    print(f"{'step':>4}  {'size':>6}  {'added':>6}  {'removed':>7}  note")
    for r in rows:
        added = "" if r["added"] is None else r["added"]
        removed = "" if r["removed"] is None else r["removed"]
        print(f"{r['step']:>4}  {r['size']:>6}  {added!s:>6}  {removed!s:>7}  {r['note']}")
    if args.out:
        Path(args.out).write_text(json.dumps({"name": scenario.name, "steps": rows}, indent=2) + "\n",
                                  encoding="utf-8")
    return 0


def cmd_synth(args, parser) -> int:
    model = _model(parser, args.model, "model")
    spec_path = _existing(parser, args.spec, "--spec")
    try:
        spec = json.loads(spec_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        parser.error(f"--spec: not valid JSON ({exc})")
    _emit(dataset_to_csv(synthesize(model, spec, args.seed)), args.out)
    return 0


def cmd_run(args, parser) -> int:
    cfg_path = _existing(parser, args.config, "--config")
    cfg = ExperimentConfig.from_file(cfg_path)
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.runs is not None:
        cfg.runs = args.runs
    if args.workers is not None:
        cfg.workers = args.workers
    if args.trace is not None:
        cfg.trace = str(Path(args.trace).resolve())
    if args.unpaired:
        cfg.paired = False
    if args.start is not None:
        cfg.start = _ids(args.start)
    report = run_experiment(cfg, args.protocol)
    sys.stdout.write(report.to_table())
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write machine-readable output (JSON or CSV) here")
    common.add_argument("--seed", type=int, default=None, help="random seed")

    p = argparse.ArgumentParser(prog="fmlearn", description="Feature-model-guided exploration of adaptation spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a model or a configuration")
    s.add_argument("model")
    s.add_argument("--config", help="feature ids, comma or space separated")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("enumerate", parents=[common], help="list valid configurations")
    s.add_argument("model")
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("degree", parents=[common], help="number of configurations with a feature")
    s.add_argument("model")
    s.add_argument("feature")
    s.set_defaults(func=cmd_degree)

    s = sub.add_parser("delta", parents=[common], help="adaptation-space change between two models")
    s.add_argument("before")
    s.add_argument("after")
    s.add_argument("--list", action="store_true", help="include the configurations themselves")
    s.set_defaults(func=cmd_delta)

    s = sub.add_parser("scenario", parents=[common], help="generate or show evolution scenarios")
    s.add_argument("action", choices=["gen", "show"])
    s.add_argument("manifest", nargs="?", help="manifest to show")
    s.add_argument("--model", help="model for an optional-restoration scenario")
    s.add_argument("--cloudrm", action="store_true", help="materialise the bundled CloudRM scenario")
    s.set_defaults(func=cmd_scenario)

    s = sub.add_parser("synth-dataset", parents=[common], help="synthesize a quality dataset CSV")
    s.add_argument("model")
    s.add_argument("--spec", required=True, help="generator spec (JSON)")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("run", parents=[common], help="run a convergence experiment")
    s.add_argument("protocol", choices=["rq1", "rq2"])
    s.add_argument("--config", required=True, help="experiment config (JSON)")
    s.add_argument("--runs", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--trace", help="write JSON-lines exploration traces here")
    s.add_argument("--unpaired", action="store_true",
                   help="draw targets and seeds per strategy instead of sharing them")
    s.add_argument("--start", help="fixed start configuration (rq1)")
    s.set_defaults(func=cmd_run)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "synth-dataset" and args.seed is None:
            args.seed = 0
        if args.command == "scenario" and args.seed is None:
            args.seed = 0
        return args.func(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except FmlearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
