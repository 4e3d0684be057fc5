"""Soft-grasp benchmarking from pre/during-grasp point clouds.

The heavy lifting lives in the compiled ``_sograb`` extension; this package
just re-exports it.
"""

from sograb._sograb import (  # noqa: F401
    ICPResult,
    PointCloud,
    RigidTransform,
    apply_transform,
    centroid,
    covariance,
    dcd,
    deform,
    grasp_score,
    icp_align,
    load_cloud,
    one_sided_dcd,
    pca_align,
    run_batch,
    sample_shape,
    save_cloud,
    segment_by_color,
    voxel_downsample,
)

__all__ = [
    "ICPResult",
    "PointCloud",
    "RigidTransform",
    "apply_transform",
    "centroid",
    "covariance",
    "dcd",
    "deform",
    "grasp_score",
    "icp_align",
    "load_cloud",
    "one_sided_dcd",
    "pca_align",
    "run_batch",
    "sample_shape",
    "save_cloud",
    "segment_by_color",
    "voxel_downsample",
]
