"""In-process bindings for the curvtopo engine.

A training loop consumes the engine through these wrappers instead of
shelling out to the CLI: the mask-to-persistence-image path, the metric
suite, the loss functions, and the fusion helpers, all pure reentrant
functions over numpy buffers.  Results are bit-exact equal to the engine's
own paths; the loss and fusion helpers are the engine functions themselves.
"""

from curvtopo.training import (
    ce_loss,
    combined_loss,
    dice_loss,
    fuse_input,
    mse_loss,
    resize_pi,
)

from .arrays import BoundArray, BoundArrayError
from .ops import bind_mask_to_pi, bind_metrics

__version__ = "0.1.0"

__all__ = [
    "BoundArray",
    "BoundArrayError",
    "bind_mask_to_pi",
    "bind_metrics",
    "ce_loss",
    "combined_loss",
    "dice_loss",
    "fuse_input",
    "mse_loss",
    "resize_pi",
    "__version__",
]
