"""Command-line entry point.

Every artifact-producing subcommand resolves its full configuration, runs,
and writes a key=value manifest next to its primary output; `replay` reruns
a manifest and verifies the recorded output hashes. All subcommands take
only flags (no positionals) so manifests map back onto argv mechanically.

Diagnostics go to stderr; data goes to files or stdout. Exit code 0 means
success.
"""

from __future__ import annotations

import argparse
import csv
import functools
import sys
from pathlib import Path

import numpy as np

from . import augment as aug
from . import classifier as clf
from . import manifest as mf
from . import oodval, probe, tensorio
from .errors import DomainError, FormatError, ToolkitError

CORRUPTION_KINDS = ("gaussian_noise", "gaussian_blur", "contrast", "fog")


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise DomainError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise DomainError(f"{flag} is empty")
    return values


def _parse_int_list(text: str, flag: str) -> list[int]:
    return [int(v) for v in _parse_float_list(text, flag)]


def _manifest_path(args, default_anchor) -> str:
    if args.manifest:
        return args.manifest
    if default_anchor:
        return f"{default_anchor}.manifest"
    return f"{args.subcommand}.manifest"


def _write_manifest(args, arg_names, inputs, outputs, anchor=None) -> None:
    values = {name: getattr(args, name) for name in arg_names}
    text = mf.build_manifest(args.subcommand, values, inputs, outputs)
    path = _manifest_path(args, anchor)
    mf.write_manifest(path, text)
    print(f"manifest: {path}", file=sys.stderr)


def cmd_augment(args) -> int:
    dataset = tensorio.load_cifar_binary(args.data, args.classes)
    config = aug.AugmentConfig(
        radius=args.radius,
        apply_probability=args.prob,
        mode=args.mode,
        seed=args.seed,
        apr_first=args.apr_first,
    )
    augmented = aug.augment_batch(dataset, config)
    tensorio.write_cifar_binary(augmented, args.out)
    outputs = {"data": args.out}
    if args.sample_count > 0:
        sample_dir = args.sample_dir or str(Path(args.out).parent / "samples")
        args.sample_dir = sample_dir
        Path(sample_dir).mkdir(parents=True, exist_ok=True)
        for i, image in enumerate(augmented.images[: args.sample_count]):
            path = Path(sample_dir) / f"sample_{i:04d}.ppm"
            path.write_bytes(tensorio.write_ppm(image))
            outputs[f"sample_{i}"] = str(path)
    print(
        f"augmented {len(dataset)} -> {len(augmented)} records ({args.mode}, "
        f"radius {args.radius}, prob {args.prob})",
        file=sys.stderr,
    )
    _write_manifest(
        args,
        ["data", "out", "classes", "radius", "mode", "prob", "seed", "apr_first",
         "sample_count", "sample_dir"],
        {"data": args.data},
        outputs,
        anchor=args.out,
    )
    return 0


def cmd_probe(args) -> int:
    state = clf.load_model(args.model)
    dataset = tensorio.load_cifar_binary(args.data, args.classes)
    radii = _parse_float_list(args.radii, "--radii")
    mean_amp = probe.mean_amplitude(dataset)
    model = functools.partial(clf.forward, state)
    rows = probe.probe_table(model, dataset, radii, mean_amp)
    probe.write_probe_csv(rows, args.out)
    print(probe.format_probe_table(rows))
    _write_manifest(
        args,
        ["model", "data", "classes", "radii", "out"],
        {"model": args.model, "data": args.data},
        {"table": args.out},
        anchor=args.out,
    )
    return 0


def cmd_train(args) -> int:
    dataset = tensorio.load_cifar_binary(args.data, args.classes)
    milestones = tuple(m for m in _parse_int_list(args.milestones, "--milestones")
                       if m < args.epochs)
    schedule = clf.SgdSchedule(
        base_lr=args.base_lr,
        decay_factor=args.decay,
        milestone_epochs=milestones,
        total_epochs=args.epochs,
        momentum=args.momentum,
        batch_size=args.batch_size,
        weight_decay=args.weight_decay,
    )
    hook = None
    if args.augment_online:
        hook = aug.online_hook(
            aug.AugmentConfig(
                radius=args.radius,
                apply_probability=args.prob,
                mode=args.mode,
                seed=args.seed,
                apr_first=args.apr_first,
            )
        )
    test_dataset = (
        tensorio.load_cifar_binary(args.test_data, args.classes) if args.test_data else None
    )
    state, log = clf.train(
        dataset,
        schedule,
        augment_hook=hook,
        seed=args.seed,
        hidden_dim=args.hidden,
        test_dataset=test_dataset,
    )
    clf.save_model(state, args.out)
    inputs = {"data": args.data}
    outputs = {"model": args.out}
    if args.test_data:
        inputs["test_data"] = args.test_data
    if args.log_out:
        clf.write_training_log(log, args.log_out)
        outputs["log"] = args.log_out
    for entry in log:
        line = (
            f"epoch {entry.epoch}: lr {entry.lr:.5g} loss {entry.loss:.4f} "
            f"train_acc {entry.train_acc:.4f}"
        )
        if entry.test_acc is not None:
            line += f" test_acc {entry.test_acc:.4f}"
        print(line, file=sys.stderr)
    _write_manifest(
        args,
        ["data", "out", "classes", "epochs", "batch_size", "base_lr", "decay",
         "milestones", "momentum", "weight_decay", "hidden", "seed", "augment_online",
         "radius", "mode", "prob", "apr_first", "test_data", "log_out"],
        inputs,
        outputs,
        anchor=args.out,
    )
    return 0


def _read_score_column(path) -> np.ndarray:
    """One-column CSV with header 'score'."""
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["score"]:
            raise FormatError(f"{path}: expected header ['score'], got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad score {row[0]!r}") from None
    return np.array(values, dtype=np.float64)


def cmd_eval_ood(args) -> int:
    scores_mode = args.in_scores is not None or args.ood_scores is not None
    model_mode = args.model is not None
    if scores_mode == model_mode:
        raise DomainError("pass either --in-scores/--ood-scores or --model with datasets")

    lines = []
    if scores_mode:
        if not (args.in_scores and args.ood_scores):
            raise DomainError("--in-scores and --ood-scores must be given together")
        scores = oodval.ScoreSet(
            _read_score_column(args.in_scores), _read_score_column(args.ood_scores)
        )
        report = oodval.auroc(scores)
        lines.append(f"AUROC {report.auroc:.4f}")
        inputs = {"in_scores": args.in_scores, "ood_scores": args.ood_scores}
    else:
        if not (args.in_data and args.ood_data):
            raise DomainError("--model needs --in-data and --ood-data")
        state = clf.load_model(args.model)
        in_dataset = tensorio.load_cifar_binary(args.in_data, args.classes)
        ood_dataset = tensorio.load_cifar_binary(args.ood_data, args.classes)
        name = Path(args.ood_data).stem
        ood_report = oodval.evaluate_ood(
            functools.partial(clf.forward, state), in_dataset, {name: ood_dataset}
        )
        lines.append(oodval.format_ood_report(ood_report))
        lines.append(f"AUROC {ood_report.rows[0].auroc:.4f}")
        inputs = {"model": args.model, "in_data": args.in_data, "ood_data": args.ood_data}

    text = "\n".join(lines)
    print(text)
    outputs = {}
    if args.out:
        Path(args.out).write_text(text + "\n")
        outputs["report"] = args.out
    _write_manifest(
        args,
        ["in_scores", "ood_scores", "model", "in_data", "ood_data", "classes", "out"],
        inputs,
        outputs,
        anchor=args.out,
    )
    return 0


def cmd_corrupt(args) -> int:
    dataset = tensorio.load_cifar_binary(args.data, args.classes)
    constants = aug.load_corruption_constants(args.constants) if args.constants else None
    spec = aug.CorruptionSpec(kind=args.kind, severity=args.severity, seed=args.seed)
    corrupted = aug.corrupt_collection(dataset.images, spec, constants)
    tensorio.write_cifar_binary(
        tensorio.LabeledDataset(corrupted, dataset.class_count), args.out
    )
    print(f"corrupted {len(corrupted)} records ({args.kind} s{args.severity})", file=sys.stderr)
    inputs = {"data": args.data}
    if args.constants:
        inputs["constants"] = args.constants
    _write_manifest(
        args,
        ["data", "out", "classes", "kind", "severity", "seed", "constants"],
        inputs,
        {"data": args.out},
        anchor=args.out,
    )
    return 0


def cmd_stats(args) -> int:
    dataset = tensorio.load_cifar_binary(args.data, args.classes)
    values = np.stack([img.data for img in dataset.images])
    counts = np.bincount(dataset.labels(), minlength=dataset.class_count)
    lines = [
        f"records: {len(dataset)}",
        f"classes: {dataset.class_count}",
        f"class_counts: {','.join(str(c) for c in counts)}",
        f"value_min: {values.min():.6f}",
        f"value_max: {values.max():.6f}",
        f"value_mean: {values.mean():.6f}",
    ]
    text = "\n".join(lines)
    print(text)
    outputs = {}
    if args.out:
        Path(args.out).write_text(text + "\n")
        outputs["stats"] = args.out
    _write_manifest(
        args, ["data", "classes", "out"], {"data": args.data}, outputs, anchor=args.out
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_replay(args) -> int:
    entries = mf.parse_manifest(args.manifest)
    problems = mf.hash_mismatches(entries, "in")
    if problems:
        for p in problems:
            print(f"replay: input mismatch: {p}", file=sys.stderr)
        return 1
    argv = mf.manifest_argv(entries)
    print(f"replay: {' '.join(argv)}", file=sys.stderr)
    code = main(argv)
    if code != 0:
        return code
    problems = mf.hash_mismatches(entries, "out")
    if problems:
        for p in problems:
            print(f"replay: output mismatch: {p}", file=sys.stderr)
        return 1
    print("replay: outputs verified", file=sys.stderr)
    return 0


def _add_common(parser, *, data=True, out=True, classes=True):
    if data:
        parser.add_argument("--data", required=True, help="input dataset (CIFAR binary)")
    if out:
        parser.add_argument("--out", required=True, help="output path")
    if classes:
        parser.add_argument("--classes", type=int, default=10, help="label count (default 10)")
    parser.add_argument("--manifest", default=None, help="manifest path (default <out>.manifest)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqaug",
        description="Frequency-domain augmentation, probing, and OOD evaluation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("augment", help="expand a dataset with frequency-band augmentation")
    _add_common(p)
    p.add_argument("--radius", type=float, default=4.0, help="band radius (default 4)")
    p.add_argument("--mode", choices=aug.MODES, default="rfc")
    p.add_argument("--prob", type=float, default=0.5, help="per-image apply probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--apr-first", action="store_true",
                   help="in rfc+apr mode, run the amplitude stage first")
    p.add_argument("--sample-count", type=int, default=0, help="write N PPM previews")
    p.add_argument("--sample-dir", default=None)
    p.set_defaults(run=cmd_augment)

    p = sub.add_parser("probe", help="banded/phase probe accuracy table for a model")
    p.add_argument("--model", required=True)
    _add_common(p)
    p.add_argument("--radii", default="4,8", help="comma-separated radii (default 4,8)")
    p.set_defaults(run=cmd_probe)

    p = sub.add_parser("train", help="train the bundled classifier")
    _add_common(p)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--base-lr", type=float, default=0.1)
    p.add_argument("--decay", type=float, default=0.2)
    p.add_argument("--milestones", default="6,12,16,19",
                   help="epochs where lr decays; entries >= --epochs are dropped")
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--hidden", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--augment-online", action="store_true",
                   help="apply frequency augmentation per batch during training")
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--mode", choices=aug.MODES, default="rfc")
    p.add_argument("--prob", type=float, default=0.5)
    p.add_argument("--apr-first", action="store_true")
    p.add_argument("--test-data", default=None)
    p.add_argument("--log-out", default=None, help="write per-epoch CSV log here")
    p.set_defaults(run=cmd_train)

    p = sub.add_parser("eval-ood", help="AUROC of in-dist vs OOD confidence scores")
    p.add_argument("--in-scores", default=None, help="CSV (header 'score') of in-dist scores")
    p.add_argument("--ood-scores", default=None, help="CSV (header 'score') of OOD scores")
    p.add_argument("--model", default=None)
    p.add_argument("--in-data", default=None)
    p.add_argument("--ood-data", default=None)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--out", default=None, help="also write the report here")
    p.add_argument("--manifest", default=None)
    p.set_defaults(run=cmd_eval_ood)

    p = sub.add_parser("corrupt", help="apply a benchmark corruption at a severity")
    _add_common(p)
    p.add_argument("--kind", choices=CORRUPTION_KINDS, required=True)
    p.add_argument("--severity", type=int, choices=range(1, 6), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--constants", default=None, help="override severity constants file")
    p.set_defaults(run=cmd_corrupt)

    p = sub.add_parser("stats", help="dataset summary")
    _add_common(p, out=False)
    p.add_argument("--out", default=None, help="also write the summary here")
    p.set_defaults(run=cmd_stats)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(run=cmd_serve)

    p = sub.add_parser("replay", help="rerun a manifest and verify output hashes")
    p.add_argument("--manifest", required=True)
    p.set_defaults(run=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (ToolkitError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
