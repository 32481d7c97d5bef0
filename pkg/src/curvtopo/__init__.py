"""curvtopo: persistence diagrams, persistence images, and topology-aware
metrics for binary curvilinear segmentation masks."""

__version__ = "0.1.0"

from .mask_io import (
    RasterFormatError,
    load_mask,
    load_raster,
    mask_to_point_cloud,
    pair_directories,
    save_mask,
    save_raster,
)
from .rips import (
    Filtration,
    RipsConfig,
    Simplex,
    SimplexBudgetError,
    build_flag_filtration,
    pairwise_distances,
    subsample,
)
from .persistence import (
    FiltrationOrderError,
    PersistenceDiagram,
    PersistencePair,
    ReductionStats,
    betti_at,
    compute_h0,
    diagram_from_json,
    diagram_to_json,
    load_diagram,
    reduce,
    save_diagram,
)
from .pi import (
    PiConfig,
    diagram_to_pi,
    mask_to_diagram,
    mask_to_pi,
    normalize,
    rasterize,
    select_and_cap,
    transform_diagram,
    weight,
)
from .metrics import (
    MetricsReport,
    betti_error,
    cl_dice,
    dice,
    evaluate_masks,
    mask_betti,
    miou,
    skeletonize,
)
from .training import (
    ce_loss,
    combined_loss,
    dice_loss,
    fuse_input,
    mse_loss,
    resize_pi,
)

__all__ = [
    "__version__",
    "RasterFormatError", "load_mask", "load_raster", "mask_to_point_cloud",
    "pair_directories", "save_mask", "save_raster",
    "Filtration", "RipsConfig", "Simplex", "SimplexBudgetError",
    "build_flag_filtration", "pairwise_distances", "subsample",
    "FiltrationOrderError", "PersistenceDiagram", "PersistencePair",
    "ReductionStats", "betti_at", "compute_h0", "diagram_from_json",
    "diagram_to_json", "load_diagram", "reduce", "save_diagram",
    "PiConfig", "diagram_to_pi", "mask_to_diagram", "mask_to_pi", "normalize",
    "rasterize", "select_and_cap", "transform_diagram", "weight",
    "MetricsReport", "betti_error", "cl_dice", "dice", "evaluate_masks",
    "mask_betti", "miou", "skeletonize",
    "ce_loss", "combined_loss", "dice_loss", "fuse_input", "mse_loss",
    "resize_pi",
]
