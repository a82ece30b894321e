"""Command-line interface: reproducible corpus, training and evaluation runs.

    ldrnet <synth|extract|train|eval|ablate|perturb-eval|heatmap>
           [--config FILE] [--<key> VALUE ...]

Every command resolves its settings from defaults, then the config file,
then command-line overrides; writes its outputs plus an experiment record;
and returns 0 on success, 1 on usage/config errors, 2 on I/O errors and 3 on
data/contract errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .classifier import (
    concat_features,
    load_checkpoint,
    predict_proba,
    save_checkpoint,
    train,
)
from .config import SCHEMA_KEYS, RunConfig, parse_config_file, resolve_config
from .corpus import (
    decode_image,
    emit_image,
    generate_corpus,
    load_manifest,
    split_manifest,
)
from .errors import ConfigError, DecodeError, LdrNetError
from .lga import LgaConfig, extract_lga, gradient_kernels, gradient_magnitude, mean_abs_lga
from .lvp import LvpWeights, code_histogram, extract_lvp, pattern_entropy, with_weights
from .metrics import EvalReport, evaluate, make_samples
from .parallel import parallel_map
from .records import ExperimentRecord
from .storage import load_feature_stack, save_feature_stack
from .tensor_core import Padding, correlate2d

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DATA = 3

ABLATION_SIGMAS = (0.5, 1.0, 2.0)
ABLATION_OPERATORS = ("sobel", "roberts")


class _Parser(argparse.ArgumentParser):
    # Usage errors map to exit code 1 (argparse defaults to 2).
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ldrnet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ldrnet {__version__}")
    sub = parser.add_subparsers(dest="command")
    commands = {
        "synth": "generate the synthetic corpus and its manifest",
        "extract": "extract feature stacks for every manifest entry",
        "train": "train the detector on extracted features",
        "eval": "evaluate a checkpoint on a manifest",
        "ablate": "sweep smoothing sigma and gradient operator",
        "perturb-eval": "evaluate a checkpoint under the perturbation suite",
        "heatmap": "export diagnostic feature heatmaps for one or two images",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text, parents=[], add_help=True)
        p.add_argument("--config", default=None, help="key = value configuration file")
        for key in SCHEMA_KEYS:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
        if name == "heatmap":
            p.add_argument("images", nargs="+", help="one or two image files")
    return parser


def _resolve(args) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {
        key: getattr(args, key) for key in SCHEMA_KEYS if getattr(args, key) is not None
    }
    return resolve_config(file_values, overrides)


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_record(command: str, cfg: RunConfig, out_dir, started: float, reports=None) -> None:
    record = ExperimentRecord(
        command=command,
        config=cfg.to_dict(),
        seed=cfg.seed,
        tool_version=__version__,
        wall_clock_seconds=time.perf_counter() - started,
        reports=reports,
    )
    os.makedirs(out_dir, exist_ok=True)
    record.save(os.path.join(out_dir, f"record_{command.replace('-', '_')}.json"))


def _feature_stack(img, lga_cfg: LgaConfig, weights: LvpWeights, padding: Padding):
    lga_feat = extract_lga(img, lga_cfg)
    lvp_feat = extract_lvp(img, weights, padding)
    return lga_feat, lvp_feat, concat_features(lga_feat, lvp_feat)


def _entry_stats(lga_feat, lvp_feat) -> tuple[float, float]:
    diagnostic = lvp_feat if lvp_feat.weights.is_default else with_weights(
        lvp_feat, LvpWeights.default()
    )
    return mean_abs_lga(lga_feat), pattern_entropy(code_histogram(diagnostic))


def _evaluate_images(params, images, labels, cfg: RunConfig) -> EvalReport:
    lga_cfg = cfg.lga_config()
    weights = cfg.lvp_weights_obj()
    padding = Padding(cfg.padding)
    stacks = parallel_map(
        lambda img: _feature_stack(img, lga_cfg, weights, padding)[2], images
    )
    probs = predict_proba(params, np.stack(stacks), batch_size=cfg.batch_size)
    return evaluate(make_samples(probs, labels), threshold=cfg.threshold)


def _load_stacks(entries, features_dir):
    stacks = []
    for entry in entries:
        rel = os.path.splitext(entry.path)[0] + ".ldrf"
        stacks.append(load_feature_stack(os.path.join(features_dir, rel)))
    return stacks


# --- commands ---------------------------------------------------------------


def cmd_synth(cfg: RunConfig) -> int:
    started = time.perf_counter()
    entries = generate_corpus(cfg.synth_config(), cfg.corpus_dir)
    _write_record("synth", cfg, cfg.corpus_dir, started)
    print(f"wrote {len(entries)} images and manifest.csv to {cfg.corpus_dir}")
    return EXIT_OK


def cmd_extract(cfg: RunConfig) -> int:
    started = time.perf_counter()
    entries = load_manifest(cfg.manifest_path())
    base = os.path.dirname(os.path.abspath(cfg.manifest_path()))
    lga_cfg = cfg.lga_config()
    weights = cfg.lvp_weights_obj()
    padding = Padding(cfg.padding)

    def work(entry):
        try:
            img = decode_image(os.path.join(base, entry.path))
            lga_feat, lvp_feat, stack = _feature_stack(img, lga_cfg, weights, padding)
            return entry, stack, _entry_stats(lga_feat, lvp_feat), None
        except (DecodeError, OSError) as exc:
            return entry, None, None, exc

    results = parallel_map(work, entries)
    failures = [(e, exc) for e, _, _, exc in results if exc is not None]
    for entry, exc in failures:
        print(f"ldrnet: skipping {entry.path}: {exc}", file=sys.stderr)
    if len(failures) * 2 > len(entries):
        print(
            f"ldrnet: {len(failures)} of {len(entries)} images failed to decode",
            file=sys.stderr,
        )
        return EXIT_DATA

    os.makedirs(cfg.features_dir, exist_ok=True)
    stat_rows = []
    written = 0
    for entry, stack, stats, exc in results:
        if exc is not None:
            continue
        rel = os.path.splitext(entry.path)[0] + ".ldrf"
        target = os.path.join(cfg.features_dir, rel)
        os.makedirs(os.path.dirname(target) or ".", exist_ok=True)
        save_feature_stack(target, stack)
        stat_rows.append((entry.path, entry.label, stats[0], stats[1]))
        written += 1
    _write_csv(
        os.path.join(cfg.features_dir, "features.csv"),
        ("path", "label", "mean_abs_lga", "pattern_entropy"),
        stat_rows,
    )
    _write_record("extract", cfg, cfg.features_dir, started)
    print(f"extracted {written} feature stacks to {cfg.features_dir}")
    return EXIT_OK


def cmd_train(cfg: RunConfig) -> int:
    started = time.perf_counter()
    entries = load_manifest(cfg.manifest_path())
    stacks = _load_stacks(entries, cfg.features_dir)
    samples = list(zip(stacks, (e.label for e in entries)))
    params, history = train(samples, cfg.train_config())
    os.makedirs(cfg.out_dir, exist_ok=True)
    checkpoint = cfg.checkpoint_path()
    if os.path.dirname(checkpoint):
        os.makedirs(os.path.dirname(checkpoint), exist_ok=True)
    save_checkpoint(checkpoint, params)
    _write_json(os.path.join(cfg.out_dir, "history.json"), {"epochs": history})
    _write_record("train", cfg, cfg.out_dir, started, reports={"train": history[-1]})
    print(
        f"trained {len(samples)} samples for {cfg.epochs} epochs: "
        f"final loss {history[-1]['loss']:.4f}, train acc {history[-1]['acc']:.4f}"
    )
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    started = time.perf_counter()
    params, _ = load_checkpoint(cfg.checkpoint_path())
    entries = load_manifest(cfg.manifest_path())
    stacks = _load_stacks(entries, cfg.features_dir)
    labels = [e.label for e in entries]
    probs = predict_proba(params, np.stack(stacks), batch_size=cfg.batch_size)
    report = evaluate(make_samples(probs, labels), threshold=cfg.threshold)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_json(os.path.join(cfg.out_dir, "report.json"), report.to_dict())
    _write_csv(
        os.path.join(cfg.out_dir, "pr.csv"),
        ("recall", "precision"),
        report.pr_points,
    )
    _write_record("eval", cfg, cfg.out_dir, started, reports={"eval": report.to_dict()})
    print(f"acc={report.acc:.4f} ap={report.ap:.4f} on {len(entries)} samples")
    return EXIT_OK


def _run_split_experiment(cfg: RunConfig, images, labels, train_idx, eval_idx) -> EvalReport:
    lga_cfg = cfg.lga_config()
    weights = cfg.lvp_weights_obj()
    padding = Padding(cfg.padding)
    stacks = parallel_map(
        lambda img: _feature_stack(img, lga_cfg, weights, padding)[2], images
    )
    samples = [(stacks[i], labels[i]) for i in train_idx]
    params, _ = train(samples, cfg.train_config())
    eval_stack = np.stack([stacks[i] for i in eval_idx])
    probs = predict_proba(params, eval_stack, batch_size=cfg.batch_size)
    eval_labels = [labels[i] for i in eval_idx]
    return evaluate(make_samples(probs, eval_labels), threshold=cfg.threshold)


def cmd_ablate(cfg: RunConfig) -> int:
    started = time.perf_counter()
    entries = load_manifest(cfg.manifest_path())
    base = os.path.dirname(os.path.abspath(cfg.manifest_path()))
    images = parallel_map(
        lambda entry: decode_image(os.path.join(base, entry.path)), entries
    )
    labels = [e.label for e in entries]
    indexed = {id(e): i for i, e in enumerate(entries)}
    train_entries, eval_entries = split_manifest(entries, cfg.split_fraction, cfg.seed)
    train_idx = [indexed[id(e)] for e in train_entries]
    eval_idx = [indexed[id(e)] for e in eval_entries]

    rows = []
    for sigma in ABLATION_SIGMAS:
        variant = resolve_config(overrides={**cfg.to_dict(), "sigma": sigma})
        report = _run_split_experiment(variant, images, labels, train_idx, eval_idx)
        rows.append({"sweep": "sigma", "value": str(sigma), "acc": report.acc, "ap": report.ap})
    for operator in ABLATION_OPERATORS:
        variant = resolve_config(overrides={**cfg.to_dict(), "operator": operator})
        report = _run_split_experiment(variant, images, labels, train_idx, eval_idx)
        rows.append({"sweep": "operator", "value": operator, "acc": report.acc, "ap": report.ap})

    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_json(os.path.join(cfg.out_dir, "ablation.json"), {"rows": rows})
    _write_csv(
        os.path.join(cfg.out_dir, "ablation.csv"),
        ("sweep", "value", "acc", "ap"),
        [(r["sweep"], r["value"], r["acc"], r["ap"]) for r in rows],
    )
    _write_record("ablate", cfg, cfg.out_dir, started, reports={"ablation": rows})
    for r in rows:
        print(f"{r['sweep']}={r['value']}: acc={r['acc']:.4f} ap={r['ap']:.4f}")
    return EXIT_OK


def cmd_perturb_eval(cfg: RunConfig) -> int:
    started = time.perf_counter()
    params, _ = load_checkpoint(cfg.checkpoint_path())
    entries = load_manifest(cfg.manifest_path())
    base = os.path.dirname(os.path.abspath(cfg.manifest_path()))
    images = parallel_map(
        lambda entry: decode_image(os.path.join(base, entry.path)), entries
    )
    labels = [e.label for e in entries]

    rows = []
    clean = _evaluate_images(params, images, labels, cfg)
    rows.append({"perturbation": "none", "parameter": "-", "acc": clean.acc, "ap": clean.ap})
    for spec in cfg.perturb_specs():
        perturbed = parallel_map(spec.apply, images)
        report = _evaluate_images(params, perturbed, labels, cfg)
        kind, _, param = spec.label.partition(":")
        rows.append({"perturbation": kind, "parameter": param, "acc": report.acc, "ap": report.ap})

    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_json(os.path.join(cfg.out_dir, "perturb.json"), {"rows": rows})
    _write_csv(
        os.path.join(cfg.out_dir, "perturb.csv"),
        ("perturbation", "parameter", "acc", "ap"),
        [(r["perturbation"], r["parameter"], r["acc"], r["ap"]) for r in rows],
    )
    _write_record(
        "perturb-eval", cfg, cfg.out_dir, started, reports={"perturb": rows}
    )
    for r in rows:
        print(
            f"{r['perturbation']}({r['parameter']}): acc={r['acc']:.4f} ap={r['ap']:.4f}"
        )
    return EXIT_OK


def _normalized_heatmap(channel: np.ndarray) -> tuple[np.ndarray, float, float]:
    lo = float(channel.min())
    hi = float(channel.max())
    if hi > lo:
        return (channel - lo) / (hi - lo), lo, hi
    return np.zeros_like(channel), lo, hi


def cmd_heatmap(cfg: RunConfig, image_paths) -> int:
    started = time.perf_counter()
    if len(image_paths) > 2:
        raise ConfigError("heatmap accepts one or two images")
    os.makedirs(cfg.out_dir, exist_ok=True)
    lga_cfg = cfg.lga_config()
    weights = cfg.lvp_weights_obj()
    padding = Padding(cfg.padding)
    stems = [os.path.splitext(os.path.basename(p))[0] for p in image_paths]
    if len(stems) == 2 and stems[0] == stems[1]:
        stems[1] = stems[1] + "_2"
    scale_lines = []
    magnitudes = []
    for path, stem in zip(image_paths, stems):
        img = decode_image(path)
        lga_feat = extract_lga(img, lga_cfg)
        lvp_feat = extract_lvp(img, weights, padding)
        for tag, grid in (("lga", np.abs(lga_feat.map)), ("lvp", lvp_feat.map)):
            for c in range(grid.shape[0]):
                normalized, lo, hi = _normalized_heatmap(grid[c])
                out_path = os.path.join(cfg.out_dir, f"{stem}_{tag}_c{c}.png")
                emit_image(normalized[None], out_path)
                scale_lines.append(f"{stem}_{tag}_c{c}.png min={lo!r} max={hi!r}")
        wx, wy = gradient_kernels(lga_cfg.operator)
        gx = correlate2d(img, wx, padding)
        gy = correlate2d(img, wy, padding)
        magnitudes.append(gradient_magnitude(gx, gy, lga_cfg.epsilon).mean(axis=0))
    scales_path = os.path.join(cfg.out_dir, "heatmap_scales.txt")
    with open(scales_path, "w", encoding="utf-8") as f:
        f.write("\n".join(scale_lines) + "\n")
    for line in scale_lines:
        print(line)
    if len(image_paths) == 2:
        h = min(m.shape[0] for m in magnitudes)
        w = min(m.shape[1] for m in magnitudes)
        a = magnitudes[0][:h, :w].reshape(-1)
        b = magnitudes[1][:h, :w].reshape(-1)
        _write_csv(
            os.path.join(cfg.out_dir, f"{stems[0]}_vs_{stems[1]}_scatter.csv"),
            ("g_a", "g_b"),
            [(float(x), float(y)) for x, y in zip(a, b)],
        )
    _write_record("heatmap", cfg, cfg.out_dir, started)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "perturb-eval": cmd_perturb_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _resolve(args)
        if args.command == "heatmap":
            return cmd_heatmap(cfg, args.images)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"ldrnet: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ldrnet: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LdrNetError as exc:
        print(f"ldrnet: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
