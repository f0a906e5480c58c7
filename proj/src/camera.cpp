#include "lanesim/camera.hpp"

namespace lanesim {

bool LensModel::monotonic_up_to(double r_max, int steps) const {
  double prev = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double r = r_max * i / steps;
    const double d = distort_radius(r);
    if (d <= prev) return false;
    prev = d;
  }
  return true;
}

Eigen::Matrix3d body_rotation(const CameraPose& pose) {
  const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
  const double cp = std::cos(pose.pitch_down), sp = std::sin(pose.pitch_down);
  const double cr = std::cos(pose.roll), sr = std::sin(pose.roll);
  Eigen::Matrix3d Rz, Ry, Rx;
  Rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  Ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  Rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
  return Rz * Ry * Rx;
}

Eigen::Matrix3d camera_rotation(const CameraPose& pose) {
  // Columns: optical x (right) = body -y, optical y (down) = body -z,
  // optical z (forward) = body +x.
  Eigen::Matrix3d M;
  M << 0, 0, 1,
      -1, 0, 0,
       0, -1, 0;
  return body_rotation(pose) * M;
}

Eigen::Matrix3d intrinsic_matrix(const CameraIntrinsics& K) {
  Eigen::Matrix3d m;
  m << K.fx, 0, K.cx, 0, K.fy, K.cy, 0, 0, 1;
  return m;
}

bool project_point(const CameraPose& pose, const CameraIntrinsics& K,
                   const Eigen::Vector3d& p, Eigen::Vector2d* pixel,
                   double min_depth) {
  const Eigen::Matrix3d R = camera_rotation(pose);
  const Eigen::Vector3d q = R.transpose() * (p - pose.position);
  if (q.z() <= min_depth) return false;
  pixel->x() = K.fx * q.x() / q.z() + K.cx;
  pixel->y() = K.fy * q.y() / q.z() + K.cy;
  return true;
}

CameraIntrinsics standard_intrinsics() {
  CameraIntrinsics K;
  K.fx = 200.0;
  K.fy = 200.0;
  K.cx = 104.0;
  K.cy = 56.0;
  K.width = 208;
  K.height = 112;
  return K;
}

CameraPose standard_camera_mount() {
  CameraPose p;
  p.position = Eigen::Vector3d(1.77, 0.0, 1.47);
  return p;
}

}  // namespace lanesim
