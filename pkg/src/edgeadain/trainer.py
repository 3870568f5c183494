"""Decoder + CBAM training loop on natural images (encoder frozen)."""
import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .core import image_to_tensor, list_images, random_crop, read_image, to_rgb
from .edge import EdgeProviderConfig, scharr_edges
from .losses import LossWeights, content_loss, edge_loss, style_loss, total_loss
from .stylenet import build_network, encode_taps, forward_features, load_network, save_network

log = logging.getLogger(__name__)

LOG_NAME = "train_log.csv"
LOG_HEADER = ["iter", "content", "style", "edge", "total", "lr"]
STATE_NAME = "checkpoint.json"


@dataclass
class TrainConfig:
    iterations: int = 20000
    learning_rate: float = 1e-4
    lr_decay: float = 5e-5
    crop: int = 256
    batch: int = 1
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    checkpoint_every: int = 1000
    encoder_variant: str = "tiny"
    encoder_weights: str = None
    edge_weight: float = 1.0

    def __post_init__(self):
        if isinstance(self.weights, dict):
            self.weights = LossWeights(**self.weights)
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.crop < 8 or self.crop % 8:
            raise ValueError("crop must be a positive multiple of 8")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")
        if self.encoder_variant not in ("tiny", "vgg19"):
            raise ValueError(f"unknown encoder variant {self.encoder_variant!r}")

    def to_dict(self):
        return asdict(self)


@dataclass
class Checkpoint:
    net: torch.nn.Module
    config: TrainConfig
    iteration: int
    rng_state: dict


def save_checkpoint(ckpt, path):
    path = Path(path)
    save_network(ckpt.net, path)
    state = {"config": ckpt.config.to_dict(), "iteration": ckpt.iteration, "rng_state": ckpt.rng_state}
    (path / STATE_NAME).write_text(json.dumps(state, indent=1))


def load_checkpoint(path):
    path = Path(path)
    net = load_network(path)
    state_file = path / STATE_NAME
    if state_file.exists():
        state = json.loads(state_file.read_text())
        config = TrainConfig(**state["config"])
        return Checkpoint(net, config, state["iteration"], state["rng_state"])
    return Checkpoint(net, TrainConfig(), 0, {})


def fit_crop(img, crop):
    """Bilinear upscale so the shorter side reaches ``crop``; no-op otherwise."""
    h, w = img.shape[:2]
    short = min(h, w)
    if short >= crop:
        return img
    scale = crop / short
    size = (max(crop, round(h * scale)), max(crop, round(w * scale)))
    t = F.interpolate(image_to_tensor(img), size=size, mode="bilinear", align_corners=False)
    return t[0].numpy().transpose(1, 2, 0)


def _load_dir(directory):
    paths = list_images(directory)
    if not paths:
        raise ValueError(f"no readable images in {directory}")
    return [to_rgb(read_image(p)) for p in paths]


def _sample(rng, images, crop):
    img = images[int(rng.integers(len(images)))]
    return random_crop(fit_crop(img, crop), crop, int(rng.integers(2**31)))


def training_step(net, content, style, edge_rgb, cfg):
    """Forward + losses on one batch; returns ``(total_tensor, parts)``."""
    out, adacs, style_taps, edge_taps = forward_features(net, content, style, edge_rgb, cfg.edge_weight)
    out_taps = encode_taps(out, net.encoder)
    lc = content_loss(out_taps[-1], adacs.detach())
    ls = style_loss(out_taps, style_taps)
    le = edge_loss(out_taps, edge_taps)
    parts = {"content": lc.item(), "style": ls.item(), "edge": le.item()}
    for name, value in parts.items():
        if not math.isfinite(value):
            raise FloatingPointError(f"non-finite {name} loss ({value})")
    return total_loss(lc, ls, le, cfg.weights), parts


def train(content_dir, style_dir, cfg, out_dir, edge_provider=None):
    """Train decoder and CBAM; writes checkpoints and ``train_log.csv`` to ``out_dir``."""
    edge_provider = edge_provider or EdgeProviderConfig()
    if edge_provider.kind != "fallback":
        raise ValueError("training supports only the fallback edge provider (crops have no matching edge files)")
    torch.manual_seed(cfg.seed)
    contents = _load_dir(content_dir)
    styles = _load_dir(style_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    net = build_network(cfg.encoder_variant, cfg.seed, cfg.encoder_weights)
    rng = np.random.default_rng(cfg.seed)
    params = net.trainable_parameters()
    opt = torch.optim.Adam(params, lr=cfg.learning_rate, betas=(0.9, 0.999), eps=1e-8)

    with open(out_dir / LOG_NAME, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for it in range(cfg.iterations):
            lr = cfg.learning_rate / (1.0 + cfg.lr_decay * it)
            for group in opt.param_groups:
                group["lr"] = lr
            batch_c, batch_s, batch_e = [], [], []
            for _ in range(cfg.batch):
                c = _sample(rng, contents, cfg.crop)
                s = _sample(rng, styles, cfg.crop)
                e = scharr_edges(c).as_image()
                batch_c.append(image_to_tensor(c))
                batch_s.append(image_to_tensor(s))
                batch_e.append(image_to_tensor(to_rgb(e)))
            loss, parts = training_step(
                net, torch.cat(batch_c), torch.cat(batch_s), torch.cat(batch_e), cfg
            )
            opt.zero_grad()
            loss.backward()
            opt.step()

            report = total_loss(parts["content"], parts["style"], parts["edge"], cfg.weights)
            writer.writerow([it, repr(report.content), repr(report.style), repr(report.edge),
                             repr(report.total), repr(lr)])
            if (it + 1) % cfg.checkpoint_every == 0 and it + 1 < cfg.iterations:
                save_checkpoint(Checkpoint(net, cfg, it + 1, rng.bit_generator.state), out_dir / f"ckpt_{it + 1:06d}")
                log.info("iter %d total %.5f", it + 1, report.total)

    final = Checkpoint(net, cfg, cfg.iterations, rng.bit_generator.state)
    save_checkpoint(final, out_dir / "final")
    return final


def read_log(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k == "iter" else float(v)) for k, v in row.items()} for row in rows]
