#!/usr/bin/env python3
"""Generate a directory of synthetic binary masks for pipeline testing.

Vessel masks are random branching walks with curvilinear texture; ring masks
are annuli with a guaranteed dim-1 cycle.  Output is one PNG per mask,
deterministic in the base seed.
"""

import argparse
from pathlib import Path

from curvtopo.mask_io import save_mask
from curvtopo.synthetic import make_ring_mask, make_vessel_mask


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path, help="directory for the PNG masks")
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--height", type=int, default=256)
    parser.add_argument("--width", type=int, default=256)
    parser.add_argument(
        "--kind", choices=("vessel", "ring", "mixed"), default="vessel"
    )
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if args.count < 1:
        parser.error("--count must be >= 1")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        kind = args.kind
        if kind == "mixed":
            kind = "vessel" if i % 2 == 0 else "ring"
        if kind == "vessel":
            mask = make_vessel_mask(args.height, args.width, seed=args.seed + i)
        else:
            mask = make_ring_mask(args.height, args.width)
        path = args.out_dir / f"{kind}_{i:04d}.png"
        save_mask(mask, path)
    print(f"wrote {args.count} masks to {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
