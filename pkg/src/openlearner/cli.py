"""``openlearner`` command line: fetch, sweep, evaluate, visualize.

Exit codes: 0 ok, 2 usage/config, 3 data error, 4 numeric/model error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import datasets, viz
from .bayes import ImpossibleObservationError
from .harness import ConfigError, EvaluationError, ExperimentConfig, evaluate, sweep
from .learning import CLASSIFIERS, ParameterError
from .models import LearnerHistory, LearnerModel, snapshot

log = logging.getLogger("openlearner")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 2, 3, 4


class UsageError(Exception):
    pass


# -- helpers ---------------------------------------------------------------


def _manifest(args: argparse.Namespace, dataset_cfg: dict[str, Any] | None = None) -> datasets.DatasetManifest:
    dataset_cfg = dataset_cfg or {}
    cache = args.cache or dataset_cfg.get("cache")
    manifest_path = args.manifest or dataset_cfg.get("manifest")
    if manifest_path:
        return datasets.DatasetManifest.load(manifest_path, cache)
    name = getattr(args, "dataset", None) or dataset_cfg.get("name", "peek")
    if name != "peek":
        raise UsageError(f"unknown dataset {name!r}; only 'peek' is built in (use --manifest otherwise)")
    return datasets.peek_manifest(cache)


def _mapping(args: argparse.Namespace, dataset_cfg: dict[str, Any] | None = None) -> datasets.ColumnMapping:
    source = getattr(args, "mapping", None) or (dataset_cfg or {}).get("mapping")
    if source is None:
        return datasets.ColumnMapping()
    if isinstance(source, dict):
        return datasets.ColumnMapping.from_dict(source)
    return datasets.ColumnMapping.load(source)


def _load_streams(args, config: ExperimentConfig) -> datasets.LoadedDataset:
    manifest = _manifest(args, config.dataset)
    datasets.fetch(manifest)
    loaded = datasets.load(manifest, _mapping(args, config.dataset))
    if loaded.rejects:
        rejects_path = manifest.directory / "rejects.jsonl"
        datasets.write_rejects(rejects_path, loaded.rejects)
        log.warning("%d rows rejected; see %s", len(loaded.rejects), rejects_path)
    return loaded


def _write_json(path: str | os.PathLike, doc: Any) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _print_table(model: str, aggregate) -> None:
    print(f"{'model':<12} {'accuracy':>9} {'precision':>9} {'recall':>9} {'f1':>9} {'events':>8}")
    if aggregate is None:
        print(f"{model:<12} {'-':>9} {'-':>9} {'-':>9} {'-':>9} {0:>8}")
        return
    print(
        f"{model:<12} {aggregate.accuracy:>9.4f} {aggregate.precision:>9.4f} "
        f"{aggregate.recall:>9.4f} {aggregate.f1:>9.4f} {aggregate.event_count:>8}"
    )


def _config(args: argparse.Namespace, path: str | None) -> ExperimentConfig:
    doc: dict[str, Any] = {}
    if path:
        doc = json.loads(Path(path).read_text())
    if args.model:
        doc["model"] = args.model
    if getattr(args, "warm_up", None) is not None:
        doc["warm_up_events"] = args.warm_up
    return ExperimentConfig.from_dict(doc)


# -- commands --------------------------------------------------------------


def cmd_fetch(args: argparse.Namespace) -> int:
    manifest = _manifest(args)
    paths = datasets.fetch(manifest)
    for name, path in paths.items():
        print(f"{datasets.sha256_file(path)}  {path}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config(args, args.config)
    grid = json.loads(Path(args.grid).read_text())
    config = ExperimentConfig.from_dict({**_config_dict(config), "grid": grid})
    loaded = _load_streams(args, config)
    result = sweep(config, loaded.train, jobs=args.jobs)
    _write_json(args.out, {"model": config.model, **result.to_dict()})
    print(f"best f1 {result.best_f1:.4f} with {json.dumps(result.best_params, sort_keys=True)}")
    return EXIT_OK


def _config_dict(config: ExperimentConfig) -> dict[str, Any]:
    return {
        "model": config.model,
        "params": config.params,
        "grid": config.grid,
        "warm_up_events": config.warm_up_events,
        "min_events": config.min_events,
        "dataset": config.dataset,
    }


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config(args, args.config)
    loaded = _load_streams(args, config)
    best: dict[str, Any] = {}
    if args.params:
        doc = json.loads(Path(args.params).read_text())
        best = doc.get("best_params", doc)
    elif config.grid:
        best = sweep(config, loaded.train, jobs=args.jobs).best_params
    report = evaluate(config, best, loaded.test, jobs=args.jobs)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(report.to_json(timing=not args.no_timing))
    if args.states_dir:
        out = Path(args.states_dir)
        out.mkdir(parents=True, exist_ok=True)
        for result in report.results:
            base = viz.output_name(result.learner_id, "state", "json")[: -len(".state.json")]
            (out / f"{base}.json").write_text(result.learner.to_json() + "\n")
            _write_json(out / f"{base}.history.json", result.history.to_dict())
    _print_table(config.model, report.aggregate)
    return EXIT_OK


def cmd_visualize(args: argparse.Namespace) -> int:
    states = Path(args.states_dir)
    base = viz.output_name(args.learner, "state", "json")[: -len(".state.json")]
    state_path = states / f"{base}.json"
    if not state_path.exists():
        raise datasets.DatasetError(f"no persisted state for learner {args.learner!r} in {states}")
    spec = viz.VizSpec(args.kind, args.top, args.width, args.height,
                       args.title or f"{args.learner}: {args.state} ({args.kind})")
    if args.kind == "line":
        history_path = states / f"{base}.history.json"
        if not history_path.exists():
            raise viz.VizError(
                f"line charts need a persisted history; {history_path} not found "
                "(run evaluate with --states-dir)"
            )
        history = LearnerHistory.from_dict(json.loads(history_path.read_text()))
        if history.state_kind != args.state:
            raise viz.VizError(f"persisted history tracks {history.state_kind!r}, not {args.state!r}")
        data: Any = history
    else:
        learner = LearnerModel.from_json(state_path.read_text())
        data = snapshot(learner, args.state, args.top)
    svg = viz.render(data, spec)
    fmt = args.format or ("html" if str(args.out).endswith(".html") else "svg")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(viz.export_html(svg, spec) if fmt == "html" else svg)
    print(out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cache", default=None,
                   help="cache directory (default: $OPENLEARNER_CACHE or ~/.cache/openlearner)")
    p.add_argument("--manifest", default=None, help="dataset manifest JSON overriding the built-in PEEK one")
    p.add_argument("--mapping", default=None, help="column mapping JSON for the CSV layout")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="openlearner", description=__doc__, formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    models = sorted(CLASSIFIERS)
    cpus = os.cpu_count() or 1

    p = sub.add_parser("fetch", help="download and verify a dataset", formatter_class=fmt)
    p.add_argument("--dataset", default="peek", choices=["peek"], help="dataset name")
    p.add_argument("--cache", default=None,
                   help="cache directory (default: $OPENLEARNER_CACHE or ~/.cache/openlearner)")
    p.add_argument("--manifest", default=None, help="dataset manifest JSON overriding the built-in one")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("sweep", help="grid-search hyperparameters on the train split", formatter_class=fmt)
    p.add_argument("--model", required=True, choices=models, help="classifier")
    p.add_argument("--grid", required=True, help="JSON object: hyperparameter -> list of values")
    p.add_argument("--out", required=True, help="where to write the best parameters (JSON)")
    p.add_argument("--config", default=None, help="experiment config JSON (base params, dataset, protocol)")
    p.add_argument("--warm-up", type=int, default=None, help="events fitted but not scored per learner")
    p.add_argument("--jobs", type=int, default=cpus, help="learner-level worker processes")
    _data_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evaluate", help="sequential evaluation on the test split", formatter_class=fmt)
    p.add_argument("--model", required=True, choices=models, help="classifier")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--params", default=None, help="best-params JSON from `sweep` (skips the sweep)")
    p.add_argument("--warm-up", type=int, default=None, help="events fitted but not scored per learner")
    p.add_argument("--states-dir", default=None, help="also persist final learner states and histories here")
    p.add_argument("--no-timing", action="store_true", help="omit wall time so reports are byte-stable")
    p.add_argument("--jobs", type=int, default=cpus, help="learner-level worker processes")
    _data_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("visualize", help="render a persisted learner state", formatter_class=fmt)
    p.add_argument("--learner", required=True, help="learner id")
    p.add_argument("--state", default="knowledge", choices=["knowledge", "interest"], help="which beliefs")
    p.add_argument("--kind", default="bubble", choices=list(viz.KINDS), help="chart kind")
    p.add_argument("--top", type=int, default=15, help="number of topics shown")
    p.add_argument("--out", required=True, help="output file (.svg or .html)")
    p.add_argument("--states-dir", default="states", help="directory written by `evaluate --states-dir`")
    p.add_argument("--format", default=None, choices=["svg", "html"], help="output format (default: by extension)")
    p.add_argument("--width", type=int, default=640, help="pixels")
    p.add_argument("--height", type=int, default=480, help="pixels")
    p.add_argument("--title", default=None, help="chart title")
    p.set_defaults(func=cmd_visualize)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (datasets.DatasetError, viz.VizError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (EvaluationError, ImpossibleObservationError, ParameterError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
