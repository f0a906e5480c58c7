#include "lanesim/homography.hpp"

namespace lanesim {

Eigen::Matrix3d normalize_homography(const Eigen::Matrix3d& H) {
  double n = H.norm();
  if (n < 1e-300) throw RuntimeError("normalize_homography: zero matrix");
  Eigen::Matrix3d out = H / n;
  int r = 0, c = 0;
  out.cwiseAbs().maxCoeff(&r, &c);
  if (out(r, c) < 0) out = -out;
  return out;
}

Eigen::Matrix3d ground_plane_homography(const CameraPose& pose, const CameraIntrinsics& K) {
  const Eigen::Matrix3d Rt = camera_rotation(pose).transpose();
  Eigen::Matrix3d P;
  P.col(0) = Rt.col(0);                 // maps X
  P.col(1) = Rt.col(1);                 // maps Y
  P.col(2) = -Rt * pose.position;       // translation, plane z = 0
  return intrinsic_matrix(K) * P;
}

Eigen::Matrix3d ground_warp_homography(const CameraPose& src, const CameraPose& dst,
                                       const CameraIntrinsics& K) {
  const Eigen::Matrix3d Hs = ground_plane_homography(src, K);
  const Eigen::Matrix3d Hd = ground_plane_homography(dst, K);
  const Eigen::Matrix3d H = Hd * Hs.inverse();
  Eigen::Matrix3d N = normalize_homography(H);
  if (std::fabs(N.determinant()) < 1e-12)
    throw RuntimeError("ground_warp_homography: degenerate configuration");
  return N;
}

Eigen::Matrix3d rotation_warp_homography(const CameraPose& src, const CameraPose& dst,
                                         const CameraIntrinsics& K) {
  const Eigen::Matrix3d Km = intrinsic_matrix(K);
  const Eigen::Matrix3d H =
      Km * camera_rotation(dst).transpose() * camera_rotation(src) * Km.inverse();
  return normalize_homography(H);
}

Eigen::Vector3d horizon_line(const CameraPose& pose, const CameraIntrinsics& K) {
  // Ray direction in the parent frame: d = R * K^-1 * (u, v, 1).
  // The ground side is d.z < 0, so the line is the z-row of R * K^-1.
  const Eigen::Matrix3d R = camera_rotation(pose);
  const Eigen::Matrix3d Kinv = intrinsic_matrix(K).inverse();
  return (R * Kinv).row(2).transpose();
}

double horizon_row_at(const Eigen::Vector3d& line, double u) {
  if (std::fabs(line.y()) < 1e-12)
    throw RuntimeError("horizon_row_at: horizon is vertical at this column");
  return -(line.x() * u + line.z()) / line.y();
}

}  // namespace lanesim
