"""Command-line entry point: ``edgeadain <command> [flags]``.

Config precedence is flags > ``--config`` JSON > built-in defaults.
"""
import argparse
import csv
import logging
import shutil
import statistics
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from . import __version__
from .core import list_images, read_image, read_mask, write_image, write_mask
from .edge import detect_edges
from .losses import LossWeights
from .metrics import evaluate_batch, score, write_report
from .pipeline import STAGE_NAMES, RunConfig, segment
from .postprocess import overlay
from .preprocess import preprocess
from .stylenet import convert_torchvision_vgg19, stylize
from .trainer import load_checkpoint, train

log = logging.getLogger("edgeadain")


class CommandError(Exception):
    pass


class Outputs:
    """Track written files so a failed command can remove them."""

    def __init__(self):
        self.paths = []

    def add(self, path):
        path = Path(path)
        self.paths.append((path, path.exists()))
        return path

    def rollback(self):
        for path, existed in reversed(self.paths):
            if existed:
                continue
            if path.is_dir():
                shutil.rmtree(path, ignore_errors=True)
            elif path.exists():
                path.unlink()


# ---- flag groups ----------------------------------------------------------

def _add_config(p):
    p.add_argument("--config", help="JSON config file (flags override it)")


def _add_edge(p):
    p.add_argument("--edge-provider", choices=["fallback", "file"], default=None)
    p.add_argument("--edge-file", help="precomputed edge map PNG (with --edge-provider file)")
    p.add_argument("--edge", choices=["raw", "preprocessed"], default=None,
                   help="compute edges on the raw or the preprocessed image")


def _add_weights(p):
    p.add_argument("--weights", help="checkpoint directory (default: $EDGEADAIN_WEIGHTS)")


def build_parser():
    parser = argparse.ArgumentParser(prog="edgeadain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="denoise and top-hat enhance an image")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_config(p)

    p = sub.add_parser("edges", help="write the edge map of an image")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_edge(p)
    _add_config(p)

    p = sub.add_parser("stylize", help="render an image in the strokes of a style image")
    p.add_argument("--input", required=True)
    p.add_argument("--style", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--edge-weight", type=float)
    _add_weights(p)
    _add_edge(p)
    _add_config(p)

    p = sub.add_parser("segment", help="full pipeline to a binary vessel mask")
    p.add_argument("--input", required=True)
    p.add_argument("--style", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gt", help="ground-truth mask; prints metrics")
    p.add_argument("--overlay", help="write prediction (green) over ground truth (white)")
    p.add_argument("--edge-weight", type=float)
    _add_weights(p)
    _add_edge(p)
    _add_config(p)

    p = sub.add_parser("train", help="train decoder + CBAM on natural images")
    p.add_argument("--input-dir", required=True, help="content image directory")
    p.add_argument("--style", required=True, help="style image directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--iters", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--lr-decay", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--crop", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint-every", type=int)
    p.add_argument("--encoder", choices=["tiny", "vgg19"])
    p.add_argument("--encoder-weights", help="encoder container for --encoder vgg19")
    p.add_argument("--edge-weight", type=float)
    p.add_argument("--edge-provider", choices=["fallback"], default=None)
    _add_config(p)

    p = sub.add_parser("eval", help="score predicted masks against ground truth")
    p.add_argument("--input-dir", required=True, help="predicted mask directory")
    p.add_argument("--gt", required=True, help="ground-truth mask directory")
    p.add_argument("--report", help="CSV report path (a .md table is written next to it)")

    p = sub.add_parser("bench", help="per-stage execution time per image")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--style", required=True)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--report", help="CSV timing report path")
    p.add_argument("--edge-weight", type=float)
    _add_weights(p)
    _add_edge(p)
    _add_config(p)

    p = sub.add_parser("convert-vgg", help="convert torchvision vgg19 weights to an encoder container")
    p.add_argument("--input", required=True, help="torchvision vgg19 state_dict (.pth)")
    p.add_argument("--out", required=True)
    return parser


def resolve_config(args):
    cfg = RunConfig.load(getattr(args, "config", None))
    if getattr(args, "edge_provider", None):
        cfg.edge_provider = args.edge_provider
    if getattr(args, "edge_file", None):
        cfg.edge_file = args.edge_file
    if getattr(args, "edge", None):
        cfg.edge_source = args.edge
    if getattr(args, "edge_weight", None) is not None:
        cfg.edge_weight = args.edge_weight
    if getattr(args, "weights", None):
        cfg.weights = args.weights
    if args.command == "train":
        t = cfg.train
        overrides = {
            "iterations": args.iters, "learning_rate": args.lr, "lr_decay": args.lr_decay,
            "crop": args.crop, "batch": args.batch, "seed": args.seed,
            "checkpoint_every": args.checkpoint_every, "encoder_variant": args.encoder,
            "encoder_weights": args.encoder_weights, "edge_weight": args.edge_weight,
        }
        w = t.weights
        weights = LossWeights(
            w.alpha if args.alpha is None else args.alpha,
            w.beta if args.beta is None else args.beta,
            w.gamma if args.gamma is None else args.gamma,
        )
        cfg.train = replace(t, weights=weights, **{k: v for k, v in overrides.items() if v is not None})
    return cfg


def _load_net(cfg):
    if not cfg.weights:
        raise CommandError("no weights: pass --weights or set EDGEADAIN_WEIGHTS")
    if not Path(cfg.weights).is_dir():
        raise CommandError(f"weights directory not found: {cfg.weights}")
    return load_checkpoint(cfg.weights).net


def _require(*paths):
    for p in paths:
        if not Path(p).exists():
            raise CommandError(f"file not found: {p}")


# ---- commands --------------------------------------------------------------

def cmd_preprocess(args, outputs):
    _require(args.input)
    cfg = resolve_config(args)
    write_image(outputs.add(args.out), preprocess(read_image(args.input), cfg.preprocess))


def cmd_edges(args, outputs):
    _require(args.input)
    cfg = resolve_config(args)
    img = read_image(args.input)
    if cfg.edge_source == "preprocessed" and cfg.edge_provider == "fallback":
        img = preprocess(img, cfg.preprocess)
    write_image(outputs.add(args.out), detect_edges(img, cfg.edge_provider_config()).as_image())


def cmd_stylize(args, outputs):
    _require(args.input, args.style)
    cfg = resolve_config(args)
    net = _load_net(cfg)
    img = read_image(args.input)
    edge = detect_edges(img, cfg.edge_provider_config())
    out = stylize(img, read_image(args.style), edge, net, cfg.edge_weight)
    write_image(outputs.add(args.out), np.clip(out, 0.0, 1.0))


def _print_metrics(m):
    for name in ("accuracy", "sensitivity", "specificity", "precision", "dice"):
        print(f"{name}: {getattr(m, name):.6f}")


def cmd_segment(args, outputs):
    _require(args.input, args.style, *([args.gt] if args.gt else []))
    if args.overlay and not args.gt:
        raise CommandError("--overlay needs --gt")
    cfg = resolve_config(args)
    net = _load_net(cfg)
    mask, _ = segment(read_image(args.input), read_image(args.style), net, cfg)
    write_mask(outputs.add(args.out), mask)
    if args.gt:
        gt = read_mask(args.gt)
        _print_metrics(score(mask, gt))
        if args.overlay:
            path = outputs.add(args.overlay)
            path.parent.mkdir(parents=True, exist_ok=True)
            PILImage.fromarray(overlay(mask, gt)).save(path)


def cmd_train(args, outputs):
    cfg = resolve_config(args)
    outputs.add(args.out)
    ckpt = train(args.input_dir, args.style, cfg.train, args.out)
    print(f"trained {ckpt.iteration} iterations; checkpoint at {Path(args.out) / 'final'}")


def cmd_eval(args, outputs):
    report = evaluate_batch(args.input_dir, args.gt)
    print(report.table1_markdown())
    print()
    print(report.table2_markdown())
    if args.report:
        write_report(report, outputs.add(args.report))
        md = outputs.add(Path(args.report).with_suffix(".md"))
        md.write_text(report.table1_markdown() + "\n\n" + report.table2_markdown() + "\n")


def bench_rows(paths, style, net, cfg, repeat):
    """Time the pipeline ``repeat`` times per image after one warm-up run."""
    rows = []
    for path in paths:
        img = read_image(path)
        segment(img, style, net, cfg)
        runs = []
        for _ in range(repeat):
            t = {}
            segment(img, style, net, cfg, timings=t)
            runs.append(t)
        row = {"image": path.name}
        for key in STAGE_NAMES + ("total",):
            vals = [r[key] for r in runs]
            row[f"{key}_mean"] = statistics.fmean(vals)
            row[f"{key}_std"] = statistics.pstdev(vals)
        rows.append(row)
    return rows


def format_bench_table(rows):
    lines = [
        f"{'Image':<24} " + " ".join(f"{s:>18}" for s in STAGE_NAMES) + f" {'Execution Time/image(s)':>26}",
    ]
    for r in rows:
        cells = " ".join(f"{r[s + '_mean']:>9.4f}±{r[s + '_std']:<8.4f}" for s in STAGE_NAMES)
        lines.append(f"{r['image']:<24} {cells} {r['total_mean']:>16.4f}±{r['total_std']:<9.4f}")
    overall = statistics.fmean(r["total_mean"] for r in rows)
    lines.append(f"{'Edge-AdaIN (average)':<24} " + " " * (19 * len(STAGE_NAMES) - 1) + f" {overall:>16.4f}")
    return "\n".join(lines)


def cmd_bench(args, outputs):
    if args.repeat < 1:
        raise CommandError("--repeat must be >= 1")
    _require(args.input_dir, args.style)
    paths = list_images(args.input_dir)
    if not paths:
        raise CommandError(f"no images in {args.input_dir}")
    cfg = resolve_config(args)
    net = _load_net(cfg)
    rows = bench_rows(paths, read_image(args.style), net, cfg, args.repeat)
    print(format_bench_table(rows))
    if args.report:
        path = outputs.add(args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)


def cmd_convert_vgg(args, outputs):
    import torch

    _require(args.input)
    state = torch.load(args.input, map_location="cpu", weights_only=True)
    convert_torchvision_vgg19(state, outputs.add(args.out))


COMMANDS = {
    "preprocess": cmd_preprocess,
    "edges": cmd_edges,
    "stylize": cmd_stylize,
    "segment": cmd_segment,
    "train": cmd_train,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "convert-vgg": cmd_convert_vgg,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    outputs = Outputs()
    try:
        COMMANDS[args.command](args, outputs)
    except (CommandError, ValueError, FileNotFoundError, FloatingPointError, OSError) as exc:
        outputs.rollback()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BaseException:
        outputs.rollback()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
