"""Lane-keeping data and evaluation machinery: camera standardization,
viewpoint-warp augmentation, sample stores, a ridge driving policy, and the
closed-loop resimulator, all backed by the C++ core."""

from lanesim._core import (
    CameraIntrinsics,
    CameraPose,
    ConfigError,
    PatchKind,
    PatchSpec,
    Pose2,
    RidgeModel,
    RoiSpec,
    RuntimeError,
    StoreReader,
    WorldScene,
    build_patch,
    camera_world_pose,
    comfort_score,
    extract_local_trajectory,
    lateral_precision_pct,
    mapa_score_pct,
    pure_pursuit,
    render_frame,
    scene_from_config_text,
    standard_camera_mount,
    standard_intrinsics,
    train_ridge,
    warp_viewpoint,
)

__all__ = [
    "CameraIntrinsics",
    "CameraPose",
    "ConfigError",
    "PatchKind",
    "PatchSpec",
    "Pose2",
    "RidgeModel",
    "RoiSpec",
    "RuntimeError",
    "StoreReader",
    "WorldScene",
    "build_patch",
    "camera_world_pose",
    "comfort_score",
    "extract_local_trajectory",
    "lateral_precision_pct",
    "mapa_score_pct",
    "pure_pursuit",
    "render_frame",
    "scene_from_config_text",
    "standard_camera_mount",
    "standard_intrinsics",
    "train_ridge",
    "warp_viewpoint",
]
