"""Command-line harness.

Subcommands:

    distillbench train   --config cfg [--seed S] [--limit N] [--out DIR]
    distillbench distill --config cfg ...
    distillbench attack  --config cfg ...
    distillbench eval    --config cfg ...
    distillbench report  record.json [record.json ...] [--out DIR]

Each run writes its artifacts (checkpoints, adversarial sets, CSV reports,
JSON run records) into the configured output directory. Reruns with an
identical config are bit-identical. Exit code 0 on success; on failure a
named error category goes to stderr and the exit code identifies it.
"""

import argparse
import sys
import time
from pathlib import Path

from .adversarial import craft_set, evaluate_robustness
from .checkpoint import (
    load_adversarial_set,
    load_network,
    save_adversarial_set,
    save_network,
)
from .config import RunConfig, load_config, load_datasets
from .distill import run_distillation
from .errors import CheckpointError, ConfigError, DataIOError, WorkbenchError
from .metrics import accuracy, build_ledger, failure_rate, success_rate
from .nn.network import build_network
from .records import RunRecord
from .report import render_table, write_report_csv

EXIT_CODES = {
    "error": 1,
    "config": 2,
    "invalid-argument": 3,
    "shape": 4,
    "state": 5,
    "numeric": 6,
    "format": 7,
    "consistency": 8,
    "io": 9,
    "checkpoint": 10,
    "checkpoint-magic": 10,
    "checkpoint-version": 10,
    "checkpoint-checksum": 10,
}


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stamp(record: RunRecord, cfg: RunConfig) -> RunRecord:
    record.config = cfg.effective_items()
    record.config_hash = cfg.content_hash()
    return record


def cmd_train(cfg: RunConfig) -> RunRecord:
    """Train one model from scratch on ground-truth labels."""
    if cfg.regime != "separate":
        raise ConfigError(f"train requires regime = separate, got {cfg.regime!r}")
    train, test = load_datasets(cfg)
    net = build_network(cfg.architecture, role=cfg.role, seed=cfg.seed)
    record = _stamp(run_distillation(cfg.to_plan(), None, net, train, test, command="train"), cfg)
    out = _out_dir(cfg)
    save_network(out / "model.ckpt", net, regime=cfg.regime)
    record.save(out / "record.json")
    return record


def cmd_distill(cfg: RunConfig) -> RunRecord:
    """Train a student under the configured regime against a frozen teacher."""
    if not cfg.teacher_checkpoint:
        raise ConfigError("distill requires the teacher_checkpoint key")
    teacher = load_network(cfg.teacher_checkpoint)
    if cfg.teacher_architecture and teacher.architecture != cfg.teacher_architecture:
        raise CheckpointError(
            f"teacher checkpoint is {teacher.architecture!r}, "
            f"config expects {cfg.teacher_architecture!r}"
        )
    train, test = load_datasets(cfg)
    student = build_network(cfg.architecture, role="student", seed=cfg.seed)
    record = _stamp(run_distillation(cfg.to_plan(), teacher, student, train, test), cfg)
    out = _out_dir(cfg)
    save_network(out / "model.ckpt", student)
    record.save(out / "record.json")
    return record


def cmd_attack(cfg: RunConfig) -> RunRecord:
    """Craft an adversarial set from training samples against a source model."""
    start = time.perf_counter()
    if not cfg.source_checkpoint:
        raise ConfigError("attack requires the source_checkpoint key")
    source = load_network(cfg.source_checkpoint)
    train, _ = load_datasets(cfg)
    if cfg.attack_samples > len(train):
        raise ConfigError(f"attack_samples = {cfg.attack_samples} exceeds dataset size {len(train)}")
    subset = train.take(cfg.attack_samples)
    source_id = f"{source.architecture}:{source.param_hash()[:12]}"
    adv = craft_set(source, subset.inputs, subset.labels, cfg.epsilon, cfg.max_iters,
                    source_model_id=source_id)
    out = _out_dir(cfg)
    save_adversarial_set(out / "advset.ckpt", adv)
    record = _stamp(
        RunRecord(
            command="attack",
            regime=None,
            seed=cfg.seed,
            final={
                "epsilon": cfg.epsilon,
                "max_iters": cfg.max_iters,
                "num_samples": len(adv),
                "attack_success_rate": adv.success_rate(),
                "mean_iterations": float(adv.iterations_used.mean()),
                "source_model_id": source_id,
            },
            wall_clock_seconds=time.perf_counter() - start,
        ),
        cfg,
    )
    record.save(out / "record.json")
    return record


def cmd_eval(cfg: RunConfig) -> RunRecord:
    """Compare checkpoints: accuracy, mistake-repetition rates, robustness."""
    start = time.perf_counter()
    if not cfg.teacher_checkpoint:
        raise ConfigError("eval requires the teacher_checkpoint key")
    teacher = load_network(cfg.teacher_checkpoint)
    student_paths = cfg.checkpoint_list()
    students = [load_network(p) for p in student_paths]
    adv = load_adversarial_set(cfg.adversarial_set) if cfg.adversarial_set else None
    train, test = load_datasets(cfg)

    rows = []
    for name, model in [(cfg.teacher_checkpoint, teacher)] + list(zip(student_paths, students)):
        # Mistake-repetition rates compare each model against the teacher on
        # the training split; the teacher's own row pins the identities
        # (failure rate 0, success rate over its own mistakes 0).
        ledger = build_ledger(teacher, model, train)
        rows.append(
            {
                "model": Path(name).stem,
                "architecture": model.architecture,
                "role": model.role,
                "regime": None,
                "test_accuracy": accuracy(model, test),
                "train_accuracy": accuracy(model, train),
                "success_rate": success_rate(ledger),
                "failure_rate": failure_rate(ledger),
                "sample_efficiency": None,
                "adversarial_accuracy": evaluate_robustness(model, adv) if adv else None,
            }
        )

    out = _out_dir(cfg)
    write_report_csv(out / "report.csv", rows)
    record = _stamp(
        RunRecord(
            command="eval",
            regime=None,
            seed=cfg.seed,
            final={"models": rows},
            wall_clock_seconds=time.perf_counter() - start,
        ),
        cfg,
    )
    record.save(out / "record.json")
    print(render_table(rows))
    return record


def cmd_report(record_paths: list[str], out_dir: str | None) -> list[dict]:
    """Merge run records into one summary table."""
    rows = []
    for path in record_paths:
        try:
            record = RunRecord.load(path)
        except OSError as exc:
            raise DataIOError(f"cannot read record {path}: {exc}") from None
        final = record.final
        if record.command == "eval":
            rows.extend(final.get("models", []))
            continue
        rows.append(
            {
                "model": Path(path).parent.name or Path(path).stem,
                "architecture": record.config.get("architecture"),
                "role": record.config.get("role"),
                "regime": record.regime,
                "test_accuracy": final.get("test_accuracy"),
                "train_accuracy": final.get("train_accuracy"),
                "sample_efficiency": final.get("efficiency"),
            }
        )
    print(render_table(rows))
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_report_csv(out / "report.csv", rows)
    return rows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distillbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("train", "distill", "attack", "eval"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--limit", type=int, default=None)
        p.add_argument("--out", default=None)
    p = sub.add_parser("report")
    p.add_argument("records", nargs="+")
    p.add_argument("--out", default=None)
    return parser


def run(argv: list[str]) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "report":
        cmd_report(args.records, args.out)
        return 0

    overrides: dict[str, str] = {}
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.limit is not None:
        overrides["limit"] = str(args.limit)
    if args.out is not None:
        overrides["out_dir"] = args.out
    cfg = load_config(args.config, overrides)

    command = {"train": cmd_train, "distill": cmd_distill, "attack": cmd_attack, "eval": cmd_eval}
    command[args.command](cfg)
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        return run(sys.argv[1:] if argv is None else argv)
    except WorkbenchError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]


if __name__ == "__main__":
    sys.exit(main())
