"""Flat weight container: ``manifest.json`` + little-endian ``weights.bin``.

The manifest lists entries in order; each entry records ``name``,
``shape``, ``dtype`` (always ``"f32"``), ``offset`` and ``length`` in bytes
into ``weights.bin``, row-major.
"""
import json
from collections import OrderedDict
from pathlib import Path

import numpy as np

MANIFEST = "manifest.json"
BLOB = "weights.bin"
FORMAT_VERSION = 1


class WeightFileError(ValueError):
    """Raised for corrupt, truncated or incomplete weight containers."""


def save_container(directory, tensors):
    """Write an ordered mapping of name -> array to ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    offset = 0
    with open(directory / BLOB, "wb") as fh:
        for name, value in tensors.items():
            arr = np.ascontiguousarray(_as_numpy(value), dtype="<f4")
            raw = arr.tobytes(order="C")
            fh.write(raw)
            entries.append({
                "name": name,
                "shape": list(arr.shape),
                "dtype": "f32",
                "offset": offset,
                "length": len(raw),
            })
            offset += len(raw)
    with open(directory / MANIFEST, "w") as fh:
        json.dump({"version": FORMAT_VERSION, "entries": entries}, fh, indent=1)


def load_container(directory):
    """Read a container back into an ``OrderedDict`` of float32 arrays."""
    directory = Path(directory)
    try:
        manifest = json.loads((directory / MANIFEST).read_text())
    except FileNotFoundError:
        raise WeightFileError(f"missing {MANIFEST} in {directory}") from None
    except json.JSONDecodeError as exc:
        raise WeightFileError(f"corrupt manifest in {directory}: {exc}") from None
    try:
        blob = (directory / BLOB).read_bytes()
    except FileNotFoundError:
        raise WeightFileError(f"missing {BLOB} in {directory}") from None

    entries = manifest.get("entries") if isinstance(manifest, dict) else None
    if not isinstance(entries, list):
        raise WeightFileError(f"corrupt manifest in {directory}: no entry list")

    out = OrderedDict()
    for i, entry in enumerate(entries):
        name = entry.get("name", f"<entry {i}>") if isinstance(entry, dict) else f"<entry {i}>"
        try:
            shape = tuple(int(s) for s in entry["shape"])
            offset, length = int(entry["offset"]), int(entry["length"])
            dtype = entry["dtype"]
        except (KeyError, TypeError, ValueError):
            raise WeightFileError(f"corrupt manifest entry for layer {name!r}") from None
        if dtype != "f32":
            raise WeightFileError(f"layer {name!r}: unsupported dtype {dtype!r}")
        if length != 4 * int(np.prod(shape, dtype=np.int64)):
            raise WeightFileError(f"layer {name!r}: length {length} does not match shape {shape}")
        if offset < 0 or offset + length > len(blob):
            raise WeightFileError(f"layer {name!r}: weights.bin truncated")
        arr = np.frombuffer(blob, dtype="<f4", count=length // 4, offset=offset)
        out[name] = arr.reshape(shape).astype(np.float32)
    return out


def _as_numpy(value):
    if hasattr(value, "detach"):
        return value.detach().cpu().numpy()
    return np.asarray(value)
