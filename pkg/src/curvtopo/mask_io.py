"""Mask and raster I/O.

Conventions used across the package:

- A binary mask is a 2-D ``numpy.uint8`` array of shape ``(height, width)``
  with values in ``{0, 1}``.
- A point cloud is an ``(n, 2)`` ``float64`` array whose columns are
  ``(x, y)`` = (column, row), origin at the top-left pixel.  Clouds extracted
  from masks carry integer-valued coordinates in row-major scan order.
- A raster is a 2-D ``float32`` array of finite, non-negative values.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np
from PIL import Image

log = logging.getLogger(__name__)

PIR_MAGIC = b"PIR1"
# magic, width u32le, height u32le, 4 reserved zero bytes
_PIR_HEADER = struct.Struct("<4sII4x")


class RasterFormatError(ValueError):
    """Raised for malformed .pir files or non-finite raster payloads."""


def load_mask(path: str | Path, threshold: int = 128) -> np.ndarray:
    """Load an 8-bit grayscale image and binarize it.

    Pixels with value >= ``threshold`` map to 1, the rest to 0.  Multi-channel
    images are rejected rather than silently collapsed.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"mask file not found: {path}")
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    with Image.open(path) as img:
        if img.mode == "1":
            img = img.convert("L")
        if img.mode != "L":
            raise ValueError(
                f"{path}: mode {img.mode!r} is not single-channel 8-bit "
                "grayscale; no channel-collapse rule is defined"
            )
        arr = np.asarray(img, dtype=np.uint8)
    return (arr >= threshold).astype(np.uint8)


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    """Write a {0,1} mask as an 8-bit grayscale image (0/255)."""
    mask = np.asarray(mask)
    _check_binary(mask, "mask")
    img = Image.fromarray((mask * np.uint8(255)), mode="L")
    img.save(Path(path))


def mask_to_point_cloud(mask: np.ndarray) -> np.ndarray:
    """Extract foreground pixel coordinates as an (n, 2) float array.

    Points are (x, y) = (column, row) in row-major scan order, so the output
    order is deterministic for a given mask.
    """
    mask = np.asarray(mask)
    _check_binary(mask, "mask")
    rows, cols = np.nonzero(mask)
    pts = np.empty((rows.size, 2), dtype=np.float64)
    pts[:, 0] = cols
    pts[:, 1] = rows
    return pts


def save_raster(r: np.ndarray, path: str | Path) -> None:
    """Write a 2-D float raster in the .pir format (bit-exact round trip)."""
    r = np.asarray(r, dtype=np.float32)
    if r.ndim != 2:
        raise RasterFormatError(f"raster must be 2-D, got shape {r.shape}")
    if not np.isfinite(r).all():
        raise RasterFormatError("raster contains non-finite values")
    h, w = r.shape
    payload = np.ascontiguousarray(r, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_PIR_HEADER.pack(PIR_MAGIC, w, h))
        fh.write(payload)


def load_raster(path: str | Path) -> np.ndarray:
    """Read a .pir raster; inverse of :func:`save_raster`."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _PIR_HEADER.size:
        raise RasterFormatError(f"{path}: truncated header")
    magic, w, h = _PIR_HEADER.unpack_from(blob)
    if magic != PIR_MAGIC:
        raise RasterFormatError(f"{path}: bad magic {magic!r}")
    expected = _PIR_HEADER.size + 4 * w * h
    if len(blob) != expected:
        raise RasterFormatError(
            f"{path}: payload length {len(blob) - _PIR_HEADER.size} does not "
            f"match {w}x{h} float32 grid"
        )
    values = np.frombuffer(blob, dtype="<f4", offset=_PIR_HEADER.size)
    return values.reshape(h, w).copy()


def pair_directories(
    pred_dir: str | Path, gt_dir: str | Path
) -> list[tuple[Path, Path]]:
    """Pair prediction and ground-truth files by identical stem.

    Unmatched files on either side are reported through the module logger,
    never silently dropped.  An empty intersection is an error that lists
    both stem sets.
    """
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    for d in (pred_dir, gt_dir):
        if not d.is_dir():
            raise FileNotFoundError(f"directory not found: {d}")
    pred_files = {p.stem: p for p in sorted(pred_dir.iterdir()) if p.is_file()}
    gt_files = {p.stem: p for p in sorted(gt_dir.iterdir()) if p.is_file()}
    common = sorted(set(pred_files) & set(gt_files))
    if not common:
        raise ValueError(
            "no common file stems between directories; "
            f"prediction stems: {sorted(pred_files)}, "
            f"ground-truth stems: {sorted(gt_files)}"
        )
    for stem in sorted(set(pred_files) - set(gt_files)):
        log.warning("unmatched prediction file: %s", pred_files[stem])
    for stem in sorted(set(gt_files) - set(pred_files)):
        log.warning("unmatched ground-truth file: %s", gt_files[stem])
    return [(pred_files[s], gt_files[s]) for s in common]


def _check_binary(mask: np.ndarray, name: str) -> None:
    if mask.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {mask.shape}")
    if mask.size and int(mask.max(initial=0)) > 1:
        raise ValueError(f"{name} must contain only {{0,1}} values")
