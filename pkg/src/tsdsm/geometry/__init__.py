from .boxes import (
    RotatedBox3D,
    axis_aligned_iou,
    iou_matrix,
    pairwise_iou_sum,
    rotated_iou_3d,
    stack,
)

__all__ = [
    "RotatedBox3D",
    "axis_aligned_iou",
    "iou_matrix",
    "pairwise_iou_sum",
    "rotated_iou_3d",
    "stack",
]
