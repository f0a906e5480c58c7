#pragma once

#include <Eigen/Dense>

#include "lanesim/common.hpp"
#include "lanesim/image.hpp"

namespace lanesim {

// Frames:
//  - Vehicle frame: origin at the rear-axle center on the ground,
//    x forward, y left, z up.
//  - Camera body axes coincide with the vehicle axes when unrotated;
//    body rotation is Rz(yaw) * Ry(pitch_down) * Rx(roll), so positive
//    pitch_down tips the forward axis toward the ground.
//  - Optical axes: +z_cam forward (= body x), +x_cam right (= body -y),
//    +y_cam down (= body -z). Projection u = fx*x/z + cx, v = fy*y/z + cy.

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
};

// Forward radial distortion acting on normalized coordinates:
// r_d = r * (1 + k1 r^2 + k2 r^4 + k3 r^6).
struct LensModel {
  double k1 = 0, k2 = 0, k3 = 0;

  double distort_radius(double r) const {
    const double r2 = r * r;
    return r * (1.0 + r2 * (k1 + r2 * (k2 + r2 * k3)));
  }
  // The forward map must be strictly increasing over the radii the raster
  // can produce, otherwise rectification is ill-posed.
  bool monotonic_up_to(double r_max, int steps = 4096) const;
};

struct CameraPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // in the parent frame
  double yaw = 0;         // about +z, positive left
  double pitch_down = 0;  // positive tips the view down
  double roll = 0;        // about the forward axis

  bool approx_equal(const CameraPose& o, double tol = 0.0) const {
    return (position - o.position).norm() <= tol &&
           std::fabs(yaw - o.yaw) <= tol &&
           std::fabs(pitch_down - o.pitch_down) <= tol &&
           std::fabs(roll - o.roll) <= tol;
  }
};

// Body-to-parent rotation.
Eigen::Matrix3d body_rotation(const CameraPose& pose);
// Camera(optical)-to-parent rotation.
Eigen::Matrix3d camera_rotation(const CameraPose& pose);

Eigen::Matrix3d intrinsic_matrix(const CameraIntrinsics& K);

// Project a parent-frame point; returns false when the point is not in front
// of the camera (depth <= min_depth).
bool project_point(const CameraPose& pose, const CameraIntrinsics& K,
                   const Eigen::Vector3d& p, Eigen::Vector2d* pixel,
                   double min_depth = 1e-6);

// The standardized virtual camera: 1.47 m above the rear axle, 1.77 m ahead
// of it, level, 208x112 raster with fx = fy = 200, principal point (104, 56).
CameraIntrinsics standard_intrinsics();
CameraPose standard_camera_mount();

}  // namespace lanesim
