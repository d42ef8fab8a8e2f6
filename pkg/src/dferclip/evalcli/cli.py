"""Command-line entry point: ``dferclip {gen-data,train,eval,ablate,report}``.

Exit status is 0 on success, 1 for invalid arguments, configs or data, and
2 when a run fails (non-finite loss, I/O error, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..data import SyntheticSpec, generate_synthetic, load_dataset
from ..errors import ConfigError, DataError, DferClipError, TrainingError, UsageError
from ..model import ModelConfig, load_checkpoint
from ..textpipe import PromptSpec
from ..train import TrainConfig, evaluate, fit, summarize
from .protocol import split
from .report import ReportFormat, emit_report, load_records

log = logging.getLogger("dferclip")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; route that through exit code 1 instead."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON with optional 'model', 'prompt' and 'train' sections")
    p.add_argument("--data", type=Path, required=True, help="dataset directory or manifest.json")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, help="single training seed")
    p.add_argument("--seeds", type=_int_list, help="comma-separated training seeds")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr-img", type=float)
    p.add_argument("--lr-tm", type=float)
    p.add_argument("--lr-ctx", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--milestones", type=_int_list)
    p.add_argument("--gamma", type=float)
    p.add_argument("--depth", type=int, help="temporal model depth (0 = mean pooling)")
    p.add_argument("--ctx-len", type=int)
    p.add_argument("--prompt", choices=("class", "descriptor"))
    p.add_argument("--ctx-scope", choices=("class", "shared"))
    p.add_argument("--desc-pos", choices=("end", "middle"))
    p.add_argument("--ensemble", type=int)
    p.add_argument("--descriptors-k", type=int)
    p.add_argument("--protocol", choices=("kfold", "holdout"), default="kfold")
    p.add_argument("--fold", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="dferclip", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    g = sub.add_parser("gen-data", help="write a synthetic dataset")
    g.add_argument("--classes", type=int, default=7)
    g.add_argument("--per-class", type=int, default=30)
    g.add_argument("--frames", type=int, default=16)
    g.add_argument("--noise", type=float, default=0.05)
    g.add_argument("--size", type=int, default=16, help="frame height and width")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)

    t = sub.add_parser("train", help="train one model per seed")
    _add_model_flags(t)

    e = sub.add_parser("eval", help="evaluate a checkpoint on one fold")
    e.add_argument("--ckpt", type=Path, required=True)
    e.add_argument("--data", type=Path, required=True)
    e.add_argument("--fold", type=int, default=0)
    e.add_argument("--protocol", choices=("kfold", "holdout", "all"), default="kfold")
    e.add_argument("--seed", type=int, default=0, help="holdout split seed")
    e.add_argument("--out", type=Path, help="write the metrics JSON here")

    a = sub.add_parser("ablate", help="sweep one axis or a preset table")
    _add_model_flags(a)
    a.add_argument("--axis", help="axis to sweep, e.g. ctx_len or tm_depth")
    a.add_argument("--values", type=_str_list, help="comma-separated axis values")
    a.add_argument("--table", help="preset row layout: ctx-depth, prompt-depth, position-scope, ensemble, desc-k")
    a.add_argument("--format", default="markdown", help="json, csv or markdown")

    r = sub.add_parser("report", help="render records as JSON, CSV or Markdown")
    r.add_argument("--in", dest="inputs", type=Path, nargs="+", required=True)
    r.add_argument("--format", default="markdown")
    r.add_argument("--out", type=Path)
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    unknown = set(cfg) - {"model", "prompt", "train"}
    if not isinstance(cfg, dict) or unknown:
        raise ConfigError(f"{path}: expected sections model/prompt/train, got {sorted(unknown)}")
    return cfg


def resolve_configs(args, manifest) -> tuple[ModelConfig, PromptSpec, TrainConfig]:
    """Defaults, then the JSON config, then explicit flags."""
    cfg = _load_config(args.config)
    model = ModelConfig.from_dict({**ModelConfig().to_dict(), **cfg.get("model", {})})
    model = model.with_(C=manifest.n_classes, H=manifest.H, W=manifest.W)
    prompt = PromptSpec.from_dict({**PromptSpec().to_dict(), **cfg.get("prompt", {})})
    train_d = cfg.get("train", {})
    epochs = args.epochs or train_d.get("epochs", 30)
    train = TrainConfig.toy(epochs, **{k: v for k, v in train_d.items() if k != "epochs"})

    if args.depth is not None:
        model = model.with_(temporal_depth=args.depth)
    p = {}
    if args.ctx_len is not None:
        p["context_len"] = args.ctx_len
    if args.prompt is not None:
        p["prompt_kind"] = args.prompt
    if args.ctx_scope is not None:
        p["class_specific"] = args.ctx_scope == "class"
    if args.desc_pos is not None:
        p["description_position"] = args.desc_pos
    if args.ensemble is not None:
        p["ensemble_size"] = args.ensemble
    if args.descriptors_k is not None:
        p["descriptors_k"] = args.descriptors_k
    prompt = replace(prompt, **p)

    t = {}
    if args.seeds is not None:
        t["seeds"] = args.seeds
    elif args.seed is not None:
        t["seeds"] = (args.seed,)
    for flag, name in (("batch", "batch_size"), ("lr_img", "lr_img"), ("lr_tm", "lr_tm"), ("lr_ctx", "lr_ctx"),
                       ("momentum", "momentum"), ("gamma", "gamma"), ("milestones", "milestones")):
        v = getattr(args, flag)
        if v is not None:
            t[name] = v
    if args.epochs is not None and "milestones" not in t and "milestones" not in train_d:
        t["milestones"] = TrainConfig.toy(args.epochs).milestones
    train = replace(train, **t)
    return model, prompt, train


def cmd_gen_data(args) -> int:
    spec = SyntheticSpec(args.classes, args.per_class, args.frames, args.noise, args.size, args.size, args.seed)
    manifest, _ = generate_synthetic(spec, args.out)
    print(f"wrote {len(manifest.clips)} clips of {spec.C} classes to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    manifest, clips = load_dataset(args.data)
    model, prompt, train = resolve_configs(args, manifest)
    train_clips, test_clips = split(clips, args.protocol, args.fold, seed=train.seeds[0])
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "config.json").write_text(
        json.dumps({"model": model.to_dict(), "prompt": prompt.to_dict(), "train": train.to_dict()}, indent=2)
    )
    records = fit(model, prompt, manifest.classes, train_clips, test_clips, train, out_dir=args.out)
    summary = summarize(records)
    summary["fold"] = args.fold
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary))
    return EXIT_OK


def cmd_eval(args) -> int:
    model, meta = load_checkpoint(args.ckpt)
    manifest, clips = load_dataset(args.data)
    if list(manifest.classes) != list(model.classes):
        raise DataError(f"checkpoint classes {list(model.classes)} differ from dataset {manifest.classes}")
    test = clips if args.protocol == "all" else split(clips, args.protocol, args.fold, args.seed)[1]
    report = evaluate(model, test)
    report.fold = args.fold if args.protocol == "kfold" else None
    report.seed = (meta.get("extra") or {}).get("seed")
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        args.out.write_text(text)
    print(text)
    return EXIT_OK


def cmd_ablate(args) -> int:
    from .ablation import AblationSpec, preset, run_ablation

    manifest, clips = load_dataset(args.data)
    model, prompt, train = resolve_configs(args, manifest)
    if args.table and args.axis:
        raise ConfigError("give either --table or --axis, not both")
    if args.table:
        spec = preset(args.table, model, prompt, train)
    elif args.axis and args.values:
        spec = AblationSpec.single(args.axis, args.values, model=model, prompt=prompt, train=train)
    else:
        raise ConfigError("ablate needs --table, or --axis together with --values")
    fmt = ReportFormat.parse(args.format)
    table = run_ablation(spec, (manifest, clips), protocol=args.protocol, fold=args.fold)
    args.out.mkdir(parents=True, exist_ok=True)
    emit_report(table, ReportFormat.JSON, args.out / f"{spec.name}.json")
    ext = {"json": "json", "csv": "csv", "markdown": "md"}[fmt.value]
    text = emit_report(table, fmt, args.out / f"{spec.name}.{ext}")
    print(text, end="")
    failed = [r for r in table if r.get("status") != "ok"]
    if failed:
        log.error("%d of %d rows failed", len(failed), len(table))
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_report(args) -> int:
    records = []
    for path in args.inputs:
        records.extend(load_records(path))
    text = emit_report(records, args.format, args.out)
    print(text, end="")
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, UsageError) as exc:
        # ConfigError, DataError and ProtocolError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, DferClipError, ArithmeticError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
