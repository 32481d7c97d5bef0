"""Forward-only loss values and tensor-fusion shape contracts.

These are audited reference computations for an external training loop;
gradients are the caller's business.  Probability maps are float arrays in
[0, 1], ground truth is a {0,1} mask, 4-D tensors are (batch, height, width,
channels) row-major.
"""

from __future__ import annotations

import numpy as np


def dice_loss(p: np.ndarray, g: np.ndarray, smooth: float = 1.0) -> float:
    """1 - (2*sum(p*g) + smooth) / (sum(p) + sum(g) + smooth)."""
    p, g = _validate_prob_pair(p, g)
    if smooth < 0:
        raise ValueError(f"smooth must be >= 0, got {smooth}")
    num = 2.0 * float((p * g).sum()) + smooth
    den = float(p.sum()) + float(g.sum()) + smooth
    if den == 0.0:
        return 0.0
    return 1.0 - num / den


def ce_loss(p: np.ndarray, g: np.ndarray, eps_clip: float = 1e-7) -> float:
    """Pixel-mean binary cross entropy with probability clipping."""
    p, g = _validate_prob_pair(p, g)
    if not 0 < eps_clip < 0.5:
        raise ValueError(f"eps_clip must be in (0, 0.5), got {eps_clip}")
    pc = np.clip(p, eps_clip, 1.0 - eps_clip)
    gl = g.astype(np.float64)
    return float(np.mean(-(gl * np.log(pc) + (1.0 - gl) * np.log1p(-pc))))


def combined_loss(p: np.ndarray, g: np.ndarray, alpha: float = 0.5) -> float:
    """alpha * dice_loss + (1 - alpha) * ce_loss."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * dice_loss(p, g) + (1.0 - alpha) * ce_loss(p, g)


def mse_loss(a: np.ndarray, b: np.ndarray) -> float:
    """Mean of squared elementwise differences."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def resize_pi(pi: np.ndarray, h2: int, w2: int) -> np.ndarray:
    """Corner-aligned bilinear resize of a 2-D raster.

    Matching dimensions return a bit-identical copy; the lerp is written as
    v0 + t * (v1 - v0) so constant inputs stay exactly constant.
    """
    pi = np.asarray(pi, dtype=np.float64)
    if pi.ndim != 2:
        raise ValueError(f"raster must be 2-D, got shape {pi.shape}")
    if h2 < 1 or w2 < 1:
        raise ValueError(f"target dims must be >= 1, got ({h2}, {w2})")
    h, w = pi.shape
    if (h2, w2) == (h, w):
        return pi.copy()
    out = pi
    if h2 != h:
        coords = _corner_coords(h, h2)
        i0 = np.minimum(coords.astype(np.int64), max(h - 2, 0))
        t = (coords - i0)[:, None]
        out = out[i0] + t * (out[np.minimum(i0 + 1, h - 1)] - out[i0])
    if w2 != w:
        coords = _corner_coords(w, w2)
        j0 = np.minimum(coords.astype(np.int64), max(w - 2, 0))
        t = (coords - j0)[None, :]
        out = out[:, j0] + t * (out[:, np.minimum(j0 + 1, w - 1)] - out[:, j0])
    return np.ascontiguousarray(out)


def fuse_input(x: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Append the PI as 3 identical channels: (b,h,w,c) -> (b,h,w,c+3).

    The PI is bilinearly resized to (h, w), replicated across the batch, and
    concatenated after the existing channels.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise ValueError(f"input tensor must be 4-D (b,h,w,c), got shape {x.shape}")
    b, h, w, c = x.shape
    resized = resize_pi(pi, h, w)
    out = np.empty((b, h, w, c + 3), dtype=np.float64)
    out[..., :c] = x
    out[..., c:] = resized[None, :, :, None]
    return out


def _corner_coords(n_src: int, n_dst: int) -> np.ndarray:
    if n_dst == 1 or n_src == 1:
        return np.zeros(n_dst, dtype=np.float64)
    return np.arange(n_dst, dtype=np.float64) * ((n_src - 1) / (n_dst - 1))


def _validate_prob_pair(p: np.ndarray, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.float64)
    g = np.asarray(g)
    if p.shape != g.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {g.shape}")
    if p.size and (not np.isfinite(p).all() or p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must be finite and lie in [0, 1]")
    if g.size and int(g.max(initial=0)) > 1:
        raise ValueError("ground truth must contain only {0,1} values")
    return p, g.astype(np.float64)
