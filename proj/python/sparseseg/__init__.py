"""Block-wise smooth/sparse image segmentation."""

from ._sparseseg import (
    FormatError,
    NotFoundError,
    SegmenterConfig,
    Solver,
    WriteError,
    build_basis,
    load_image,
    load_mask,
    precision_recall,
    save_mask,
    scaled_basis,
    segment,
    soft_threshold,
    zigzag_order,
)

__all__ = [
    "FormatError",
    "NotFoundError",
    "SegmenterConfig",
    "Solver",
    "WriteError",
    "build_basis",
    "load_image",
    "load_mask",
    "precision_recall",
    "save_mask",
    "scaled_basis",
    "segment",
    "soft_threshold",
    "zigzag_order",
]
