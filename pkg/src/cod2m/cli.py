"""Command-line entry points: generate, train, evaluate, study, report."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

from .dataset import (
    DEFAULT_REGION_BOUNDARY,
    SENSOR_ORDER,
    load_dataset,
    save_dataset,
)
from .experiment import (
    build_agents,
    evaluate,
    load_bundle,
    load_results,
    load_study_config,
    normalize_sweep,
    report,
    run_study,
    save_bundle,
    save_results,
    train_models,
)
from .fuzzyga import FgaConfig
from .metrics import write_roc_csv
from .neuroevo import NeatConfig
from .synthgen import default_config, generate_dataset, load_gen_config

log = logging.getLogger("cod2m")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems instead of exiting."""

    def error(self, message: str) -> None:
        raise _UsageError(f"{self.prog}: {message}")


def _configure_logging() -> None:
    name = os.environ.get("COD2M_LOG", "error").lower()
    if name not in _LOG_LEVELS:
        raise _UsageError(
            f"COD2M_LOG must be one of {sorted(_LOG_LEVELS)}, got {name!r}"
        )
    logging.basicConfig(
        stream=sys.stderr,
        level=_LOG_LEVELS[name],
        format="%(levelname)s %(name)s: %(message)s",
    )


def _parse_sweep(text: str) -> dict:
    """Parse "alpha=P,R;omega=N,F" into a sweep mapping."""
    sweep: dict[str, tuple[str, ...]] = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise _UsageError(f"sweep clause {part!r} is not level=symbols")
        key, _, value = part.partition("=")
        symbols = tuple(s.strip() for s in value.split(",") if s.strip())
        sweep[key.strip()] = symbols
    try:
        return normalize_sweep(sweep)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise _UsageError(f"seeds must be comma-separated integers: {text!r}") from exc
    if not seeds:
        raise _UsageError("seeds must list at least one integer")
    return seeds


def _parse_cases(text: str, boundary: float):
    from .dataset import SplitCase

    names = [c.strip() for c in text.split(",") if c.strip()]
    if not names:
        raise _UsageError("cases must list at least one of C1, C2, C3")
    try:
        return tuple(
            SplitCase.C3(boundary) if name == "C3" else SplitCase(name)
            for name in names
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="cod2m", description="Cooperative detection decision toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a two-day campaign dataset")
    p.add_argument("--config", help="generator configuration JSON")
    p.add_argument("--out", required=True, help="output dataset path")
    p.add_argument("--seed", type=int, help="override the generator seed")
    p.add_argument("--samples", type=int, help="override samples per day")

    p = sub.add_parser("train", help="train decision models on a dataset")
    p.add_argument("--data", required=True, help="training dataset path")
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--config", help="training configuration JSON")
    p.add_argument("--seed", type=int, default=0, help="training seed")

    p = sub.add_parser("evaluate", help="score trained models against a dataset")
    p.add_argument("--data", required=True, help="evaluation dataset path")
    p.add_argument("--models", required=True, help="model directory with manifest.json")
    p.add_argument("--out", required=True, help="output directory for metric tables")

    p = sub.add_parser("study", help="run the split-case training study")
    p.add_argument("--config", required=True, help="study configuration JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--cases", help="override split cases, e.g. C1,C3")
    p.add_argument("--seeds", help="override seeds, e.g. 0,1,2")
    p.add_argument("--sweep", help="override sweep, e.g. alpha=P;omega=N,F")

    p = sub.add_parser("report", help="rebuild report tables from saved results")
    p.add_argument("--results", required=True, help="results.json from a study run")
    p.add_argument("--out", required=True, help="output directory for tables")
    return parser


def _cmd_generate(args: argparse.Namespace) -> None:
    config = load_gen_config(args.config) if args.config else default_config()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.samples is not None:
        config = dataclasses.replace(config, samples_per_day=args.samples)
    log.info("generating %d samples per day with seed %d", config.samples_per_day, config.seed)
    dataset = generate_dataset(config)
    save_dataset(dataset, args.out)
    log.info("wrote %d samples to %s", len(dataset), args.out)


def _load_train_config(path: str | None) -> tuple[dict | None, NeatConfig, FgaConfig]:
    from .experiment import _config_from_fields

    if path is None:
        return None, NeatConfig(), FgaConfig()
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: training configuration must be a JSON object")
    unknown = set(doc) - {"sweep", "neat", "fuzzy"}
    if unknown:
        raise ValueError(f"{path}: unknown fields: {sorted(unknown)}")
    sweep = doc.get("sweep")
    neat = _config_from_fields(NeatConfig, doc.get("neat", {}), "neat configuration")
    fuzzy = _config_from_fields(FgaConfig, doc.get("fuzzy", {}), "fuzzy configuration")
    return sweep, neat, fuzzy


def _cmd_train(args: argparse.Namespace) -> None:
    sweep, neat_cfg, fga_cfg = _load_train_config(args.config)
    dataset = load_dataset(args.data)
    log.info("training on %d samples with seed %d", len(dataset), args.seed)
    bundle = train_models(dataset, sweep, neat_cfg, fga_cfg, args.seed)
    manifest = save_bundle(bundle, sweep, args.out)
    log.info("wrote model manifest %s", manifest)


def _cmd_evaluate(args: argparse.Namespace) -> None:
    bundle, sweep = load_bundle(args.models)
    dataset = load_dataset(args.data)
    agents = build_agents(bundle, sweep)
    log.info("evaluating %d agent variants on %d samples", len(agents), len(dataset))
    ev = evaluate(agents, dataset)
    os.makedirs(args.out, exist_ok=True)
    lines = ["level,agent,alpha,omega,accuracy,rmse,auc"]
    for kind in SENSOR_ORDER:
        m = ev.beta_metrics[kind]
        lines.append(
            f"beta,{kind.value},-,-,{m.accuracy:.17g},{m.rmse:.17g},{m.auc:.17g}"
        )
        write_roc_csv(m.roc, os.path.join(args.out, f"roc_beta_{kind.value}.csv"))
    for agent, m in zip(agents, ev.omega_metrics):
        c = agent.config
        lines.append(
            f"omega,{c.sensor.value},{c.alpha},{c.omega},"
            f"{m.accuracy:.17g},{m.rmse:.17g},{m.auc:.17g}"
        )
        write_roc_csv(
            m.roc,
            os.path.join(args.out, f"roc_omega_{c.sensor.value}_{c.alpha}_{c.omega}.csv"),
        )
    if ev.system_accuracy is not None:
        lines.append(f"system,team,-,-,{ev.system_accuracy:.17g},,")
    path = os.path.join(args.out, "evaluation.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    log.info("wrote %s", path)


def _cmd_study(args: argparse.Namespace) -> None:
    cfg = load_study_config(args.config)
    if args.jobs < 1:
        raise _UsageError("--jobs must be at least 1")
    cases = cfg.cases
    boundary = next(
        (c.region_boundary for c in cfg.cases if c.name == "C3"),
        DEFAULT_REGION_BOUNDARY,
    )
    if args.cases:
        cases = _parse_cases(args.cases, boundary)
    seeds = _parse_seeds(args.seeds) if args.seeds else cfg.seeds
    sweep = _parse_sweep(args.sweep) if args.sweep else cfg.sweep
    terrain = None
    if cfg.generator is not None:
        log.info("generating study dataset with seed %d", cfg.generator.seed)
        dataset = generate_dataset(cfg.generator)
        terrain = cfg.generator.terrain
    else:
        dataset = load_dataset(cfg.dataset_path)
    os.makedirs(args.out, exist_ok=True)
    if cfg.generator is not None:
        save_dataset(dataset, os.path.join(args.out, "dataset.txt"))
    log.info(
        "running %d case(s) x %d seed(s) with %d job(s)",
        len(cases),
        len(seeds),
        args.jobs,
    )
    results = run_study(
        dataset,
        cases,
        sweep,
        cfg.neat,
        cfg.fuzzy,
        seeds,
        jobs=args.jobs,
        terrain=terrain,
    )
    results_path = os.path.join(args.out, "results.json")
    save_results(results, results_path)
    written = report(results, args.out)
    log.info("wrote %s and %d report tables", results_path, len(written))


def _cmd_report(args: argparse.Namespace) -> None:
    results = load_results(args.results)
    written = report(results, args.out)
    log.info("wrote %d report tables", len(written))


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "study": _cmd_study,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns 0 on success, 1 usage, 2 bad data, 3 I/O failure."""
    try:
        _configure_logging()
        args = _build_parser().parse_args(argv)
        _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"cod2m: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"cod2m: missing field {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"cod2m: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cod2m: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
