"""Deterministic synthetic masks: vessel-like walks and rings.

Used by the demo scripts and the throughput checks; every generator is a
pure function of its seed.
"""

from __future__ import annotations

import math

import numpy as np

_DISK_OFFSETS = {
    r: [
        (dy, dx)
        for dy in range(-r, r + 1)
        for dx in range(-r, r + 1)
        if dy * dy + dx * dx <= r * r
    ]
    for r in (0, 1, 2, 3)
}


def make_vessel_mask(
    height: int = 256,
    width: int = 256,
    seed: int = 0,
    n_walks: int = 6,
    steps: int = 420,
    turn_sigma: float = 0.22,
    branch_prob: float = 0.012,
) -> np.ndarray:
    """A curvilinear mask of smooth random walks with occasional branches.

    Walk crossings create loops, so these masks exercise both Betti numbers.
    """
    rng = np.random.default_rng(seed)
    mask = np.zeros((height, width), dtype=np.uint8)
    queue: list[tuple[float, float, float, int, int]] = []
    for _ in range(n_walks):
        queue.append(
            (
                rng.uniform(0.1 * width, 0.9 * width),
                rng.uniform(0.1 * height, 0.9 * height),
                rng.uniform(0.0, 2.0 * math.pi),
                int(rng.integers(1, 3)),
                steps,
            )
        )
    while queue:
        x, y, ang, radius, n_steps = queue.pop()
        for _ in range(n_steps):
            ang += rng.normal(0.0, turn_sigma)
            x += math.cos(ang)
            y += math.sin(ang)
            if not (1 <= x < width - 1):
                x = min(max(x, 1.0), width - 2.0)
                ang = math.pi - ang
            if not (1 <= y < height - 1):
                y = min(max(y, 1.0), height - 2.0)
                ang = -ang
            _stamp(mask, int(round(y)), int(round(x)), radius)
            if rng.random() < branch_prob and len(queue) < 4 * n_walks:
                queue.append(
                    (
                        x,
                        y,
                        ang + rng.choice((-1.0, 1.0)) * rng.uniform(0.6, 1.2),
                        max(1, radius - 1),
                        n_steps // 3,
                    )
                )
    return mask


def make_ring_mask(
    height: int,
    width: int,
    center: tuple[float, float] | None = None,
    r_outer: float | None = None,
    r_inner: float | None = None,
) -> np.ndarray:
    """A filled annulus (thick ring); one component, one hole."""
    cy, cx = center if center is not None else ((height - 1) / 2.0, (width - 1) / 2.0)
    r_outer = r_outer if r_outer is not None else min(height, width) * 0.38
    r_inner = r_inner if r_inner is not None else r_outer * 0.55
    yy, xx = np.ogrid[:height, :width]
    dist2 = (yy - cy) ** 2 + (xx - cx) ** 2
    ring = (dist2 <= r_outer**2) & (dist2 >= r_inner**2)
    return ring.astype(np.uint8)


def _stamp(mask: np.ndarray, r: int, c: int, radius: int) -> None:
    h, w = mask.shape
    for dy, dx in _DISK_OFFSETS[radius]:
        rr, cc = r + dy, c + dx
        if 0 <= rr < h and 0 <= cc < w:
            mask[rr, cc] = 1
