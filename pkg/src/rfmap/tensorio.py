"""RFT1 binary tensor files plus their JSON sidecar manifests.

Layout (bit-exact): magic b"RFT1", little-endian u32 triple (C, h, w), then
C*h*w little-endian IEEE-754 float32 values, channel-major then row-major.
The sidecar ``<file>.json`` records channel labels and the grid.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .encoder import ChannelLabel, RayImageTensor
from .errors import CorruptFormatError
from .grids import GridSpec

MAGIC = b"RFT1"


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_rft(path, tensor: RayImageTensor) -> None:
    data = np.ascontiguousarray(tensor.data, dtype="<f4")
    c, h, w = data.shape
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<III", c, h, w))
        f.write(data.tobytes())
    doc = {
        "channel_labels": [lab.to_dict() for lab in tensor.labels],
        "grid": {
            "width_px": tensor.grid.width_px,
            "height_px": tensor.grid.height_px,
            "side_m": tensor.grid.side_m,
        },
    }
    sidecar_path(path).write_text(json.dumps(doc, separators=(",", ":")), encoding="utf-8")


def read_rft(path) -> RayImageTensor:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise CorruptFormatError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 16:
        raise CorruptFormatError(f"{path}: truncated header")
    c, h, w = struct.unpack("<III", blob[4:16])
    expected = 16 + 4 * c * h * w
    if len(blob) != expected:
        raise CorruptFormatError(
            f"{path}: expected {expected} bytes for ({c}, {h}, {w}), got {len(blob)}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=16).reshape(c, h, w).copy()

    side = sidecar_path(path)
    try:
        doc = json.loads(side.read_text(encoding="utf-8"))
        labels = tuple(ChannelLabel.from_dict(d) for d in doc["channel_labels"])
        g = doc["grid"]
        grid = GridSpec(int(g["width_px"]), int(g["height_px"]), float(g["side_m"]))
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CorruptFormatError(f"{side}: malformed sidecar: {e}") from e
    if len(labels) != c:
        raise CorruptFormatError(
            f"{side}: {len(labels)} labels for {c} channels"
        )
    if (grid.height_px, grid.width_px) != (h, w):
        raise CorruptFormatError(
            f"{side}: grid {grid.width_px}x{grid.height_px} does not match tensor {w}x{h}"
        )
    return RayImageTensor(data=data, labels=labels, grid=grid)
