"""Inference pipeline: preprocess -> edges -> stylize -> binary mask."""
import json
import os
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import check_image, to_gray
from .edge import EdgeProviderConfig, detect_edges
from .postprocess import PostConfig, binarize, cleanup
from .preprocess import PreprocessConfig, preprocess
from .stylenet import stylize
from .trainer import TrainConfig

WEIGHTS_ENV = "EDGEADAIN_WEIGHTS"
STAGE_NAMES = ("preprocess", "edge", "stylize", "postprocess")


@dataclass
class RunConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    postprocess: PostConfig = field(default_factory=PostConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    edge_provider: str = "fallback"
    edge_file: str = None
    edge_source: str = "preprocessed"  # or "raw"
    edge_weight: float = 1.0
    weights: str = None

    def __post_init__(self):
        if self.edge_source not in ("raw", "preprocessed"):
            raise ValueError(f"edge_source must be 'raw' or 'preprocessed', got {self.edge_source!r}")

    @classmethod
    def from_dict(cls, data):
        sections = {"preprocess": PreprocessConfig, "postprocess": PostConfig, "train": TrainConfig}
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for key, value in data.items():
            if key in sections:
                sec_known = {f.name for f in fields(sections[key])}
                bad = sorted(set(value) - sec_known)
                if bad:
                    raise ValueError(f"unknown keys in [{key}]: {', '.join(bad)}")
                kwargs[key] = sections[key](**value)
            else:
                kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def load(cls, path=None):
        if path is None:
            cfg = cls()
        else:
            cfg = cls.from_dict(json.loads(Path(path).read_text()))
        if cfg.weights is None:
            cfg.weights = os.environ.get(WEIGHTS_ENV)
        return cfg

    def to_dict(self):
        return asdict(self)

    def edge_provider_config(self):
        return EdgeProviderConfig(self.edge_provider, self.edge_file)


def _is_flat(img):
    gray = to_gray(check_image(img))
    return gray.max() == gray.min()


def segment(img, style, net, cfg, timings=None):
    """Run the full pipeline; returns ``(mask, stylized)``.

    If ``timings`` is a dict, per-stage wall times in seconds are stored in it.
    """
    clock = time.perf_counter
    t0 = clock()
    enhanced = preprocess(img, cfg.preprocess)
    t1 = clock()
    edge = detect_edges(enhanced if cfg.edge_source == "preprocessed" else img, cfg.edge_provider_config())
    t2 = clock()
    stylized = stylize(enhanced, style, edge, net, cfg.edge_weight)
    t3 = clock()
    mask = cleanup(binarize(stylized, cfg.postprocess), cfg.postprocess)
    if _is_flat(img):
        # no contrast, nothing to segment; strokes here would come from padding alone
        mask = np.zeros_like(mask)
    t4 = clock()
    if timings is not None:
        timings.update(preprocess=t1 - t0, edge=t2 - t1, stylize=t3 - t2, postprocess=t4 - t3, total=t4 - t0)
    return mask, stylized
