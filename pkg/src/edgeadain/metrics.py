"""Pixel-level segmentation scores and batch reports."""
import csv
import io
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from .core import check_mask, list_images, read_mask

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "precision", "dice")
CSV_HEADER = ("image", "tp", "fp", "tn", "fn") + METRIC_NAMES
# column order of the segmentation comparison table
TABLE1_COLUMNS = ("sensitivity", "specificity", "accuracy", "dice")
TABLE2_COLUMNS = (("detection_rate", "sensitivity"), ("precision", "precision"), ("f_measure", "dice"))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class SegMetrics:
    accuracy: float
    sensitivity: float
    specificity: float
    precision: float
    dice: float


def confusion(pred, gt):
    pred, gt = check_mask(pred), check_mask(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"mask size mismatch: {pred.shape} vs {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = int(pred.size) - tp - fp - fn
    return ConfusionCounts(tp, fp, tn, fn)


def _ratio(num, den):
    return 1.0 if den == 0 else num / den


def compute_metrics(c):
    if c.total == 0:
        raise ValueError("empty confusion counts")
    sens = _ratio(c.tp, c.tp + c.fn)
    spec = _ratio(c.tn, c.tn + c.fp)
    prec = _ratio(c.tp, c.tp + c.fp)
    pred_empty = c.tp + c.fp == 0
    gt_empty = c.tp + c.fn == 0
    if pred_empty and gt_empty:
        dice = 1.0
    elif pred_empty or gt_empty or prec + sens == 0:
        dice = 0.0
    else:
        dice = 2 * prec * sens / (prec + sens)
    return SegMetrics((c.tp + c.tn) / c.total, sens, spec, prec, dice)


def score(pred, gt):
    return compute_metrics(confusion(pred, gt))


@dataclass
class BatchReport:
    names: list
    counts: list
    metrics: list

    def values(self):
        return np.array([astuple(m) for m in self.metrics], dtype=np.float64)

    @property
    def mean(self):
        return SegMetrics(*map(float, self.values().mean(axis=0)))

    @property
    def std(self):
        # population std over images
        return SegMetrics(*map(float, self.values().std(axis=0)))

    def rows(self):
        out = [CSV_HEADER]
        for name, c, m in zip(self.names, self.counts, self.metrics):
            out.append((name, c.tp, c.fp, c.tn, c.fn) + astuple(m))
        out.append(("MEAN", "", "", "", "") + astuple(self.mean))
        out.append(("STD", "", "", "", "") + astuple(self.std))
        return out

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in self.rows():
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def table1_markdown(self, method="Edge-AdaIN"):
        head = "| Method | " + " | ".join(c.capitalize() for c in TABLE1_COLUMNS) + " |"
        rule = "|---" * (len(TABLE1_COLUMNS) + 1) + "|"
        mean = self.mean
        row = f"| {method} | " + " | ".join(f"{getattr(mean, c):.4f}" for c in TABLE1_COLUMNS) + " |"
        return "\n".join([head, rule, row])

    def table2_markdown(self, method="Edge-AdaIN"):
        labels = {"detection_rate": "Detection Rate", "precision": "Precision", "f_measure": "F-measure"}
        head = "| Segmentation Method | " + " | ".join(labels[k] for k, _ in TABLE2_COLUMNS) + " |"
        rule = "|---" * (len(TABLE2_COLUMNS) + 1) + "|"
        mean, std = self.mean, self.std
        cells = [f"{getattr(mean, src):.4f}±{getattr(std, src):.4f}" for _, src in TABLE2_COLUMNS]
        return "\n".join([head, rule, f"| {method} | " + " | ".join(cells) + " |"])


def evaluate_batch(pred_dir, gt_dir):
    """Score every prediction against the same-named ground-truth mask."""
    preds = {p.name: p for p in list_images(pred_dir)}
    gts = {p.name: p for p in list_images(gt_dir)}
    unmatched = sorted(set(preds) ^ set(gts))
    if unmatched:
        raise ValueError("unmatched filenames: " + ", ".join(unmatched))
    if not preds:
        raise ValueError(f"no masks found in {pred_dir}")
    names = sorted(preds)
    counts = [confusion(read_mask(preds[n]), read_mask(gts[n])) for n in names]
    return BatchReport(names, counts, [compute_metrics(c) for c in counts])


def write_report(report, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_csv())
