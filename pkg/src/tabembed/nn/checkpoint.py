"""Flat float32 parameter checkpoints with a JSON manifest."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from tabembed.nn.core import Parameter


def save_checkpoint(prefix: str | Path, params: Sequence[Parameter]) -> tuple[Path, Path]:
    """Write ``<prefix>.bin`` (row-major little-endian float32) and ``<prefix>.json``."""
    prefix = Path(prefix)
    entries, offset = [], 0
    with open(prefix.with_suffix(".bin"), "wb") as fh:
        for p in params:
            data = np.ascontiguousarray(p.value, dtype="<f4")
            fh.write(data.tobytes())
            entries.append({"name": p.name, "shape": list(p.value.shape), "offset": offset, "count": int(data.size)})
            offset += int(data.size)
    manifest = {"dtype": "float32", "byteorder": "little", "parameters": entries}
    prefix.with_suffix(".json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return prefix.with_suffix(".bin"), prefix.with_suffix(".json")


def load_checkpoint(prefix: str | Path, params: Sequence[Parameter]) -> None:
    """Fill ``params`` in place, matching by name and checking shapes."""
    prefix = Path(prefix)
    manifest = json.loads(prefix.with_suffix(".json").read_text(encoding="utf-8"))
    flat = np.fromfile(prefix.with_suffix(".bin"), dtype="<f4")
    by_name = {e["name"]: e for e in manifest["parameters"]}
    for p in params:
        e = by_name[p.name]
        if tuple(e["shape"]) != p.value.shape:
            raise ValueError(f"{p.name}: checkpoint shape {e['shape']} != {p.value.shape}")
        p.value[...] = flat[e["offset"] : e["offset"] + e["count"]].reshape(p.value.shape)
