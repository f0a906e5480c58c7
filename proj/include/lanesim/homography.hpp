#pragma once

#include <Eigen/Dense>

#include "lanesim/camera.hpp"

namespace lanesim {

// Homography from ground-plane coordinates (X, Y, 1) in the camera's parent
// frame to homogeneous pixel coordinates. Its third row evaluates to the
// camera depth of the plane point, so cheirality can be tested before the
// projective division.
Eigen::Matrix3d ground_plane_homography(const CameraPose& pose, const CameraIntrinsics& K);

// Pixel-to-pixel ground-plane homography between two cameras, normalized to
// unit Frobenius norm with a canonical sign (largest-magnitude element
// positive).
Eigen::Matrix3d ground_warp_homography(const CameraPose& src, const CameraPose& dst,
                                       const CameraIntrinsics& K);

// Pixel-to-pixel map for points at infinity (rotation-only), same
// normalization. Exact above the horizon where translation vanishes.
Eigen::Matrix3d rotation_warp_homography(const CameraPose& src, const CameraPose& dst,
                                         const CameraIntrinsics& K);

// Horizon line l such that l . (u, v, 1) < 0 exactly for pixels whose rays
// point below the horizontal plane through the camera center (the ground
// side). Handles roll: the horizon row may vary with column.
Eigen::Vector3d horizon_line(const CameraPose& pose, const CameraIntrinsics& K);

// Horizon row at a given column (assumes the line is not vertical there).
double horizon_row_at(const Eigen::Vector3d& line, double u);

Eigen::Matrix3d normalize_homography(const Eigen::Matrix3d& H);

}  // namespace lanesim
