#include "lanesim/warp.hpp"

namespace lanesim {

ImageBuffer rectify_pinhole(const ImageBuffer& src, const LensModel& lens,
                            const CameraIntrinsics& src_K, const CameraIntrinsics& dst_K) {
  if (src.width() != src_K.width || src.height() != src_K.height)
    throw RuntimeError("rectify_pinhole: source size does not match intrinsics");
  // Largest normalized radius the destination raster can request.
  const double ex = std::max(std::fabs(-0.5 - dst_K.cx), std::fabs(dst_K.width - 0.5 - dst_K.cx)) / dst_K.fx;
  const double ey = std::max(std::fabs(-0.5 - dst_K.cy), std::fabs(dst_K.height - 0.5 - dst_K.cy)) / dst_K.fy;
  const double r_max = std::sqrt(ex * ex + ey * ey);
  if (!lens.monotonic_up_to(r_max))
    throw RuntimeError("rectify_pinhole: lens model not monotonic over the raster");

  ImageBuffer out(dst_K.width, dst_K.height, src.channels());
  std::vector<float> px(static_cast<size_t>(src.channels()));
  for (int v = 0; v < dst_K.height; ++v) {
    const double yn = (v - dst_K.cy) / dst_K.fy;
    for (int u = 0; u < dst_K.width; ++u) {
      const double xn = (u - dst_K.cx) / dst_K.fx;
      const double r2 = xn * xn + yn * yn;
      const double s = 1.0 + r2 * (lens.k1 + r2 * (lens.k2 + r2 * lens.k3));
      const double xs = src_K.fx * (s * xn) + src_K.cx;
      const double ys = src_K.fy * (s * yn) + src_K.cy;
      sample_bilinear(src, xs, ys, px.data());
      for (int ch = 0; ch < src.channels(); ++ch) out.at(v, u, ch) = px[ch];
    }
  }
  return out;
}

WarpResult warp_viewpoint(const ImageBuffer& src, const CameraPose& src_pose,
                          const CameraPose& dst_pose, const CameraIntrinsics& K) {
  if (src.width() != K.width || src.height() != K.height)
    throw RuntimeError("warp_viewpoint: source size does not match intrinsics");
  constexpr double kMinDepth = 0.05;  // meters in front of a camera

  const Eigen::Matrix3d Hg_src = ground_plane_homography(src_pose, K);
  const Eigen::Matrix3d Hg_dst = ground_plane_homography(dst_pose, K);
  const Eigen::Matrix3d dst_px_to_plane = Hg_dst.inverse();
  // Unnormalized rotation homography keeps its third row equal to the ray's
  // z-component in the source camera, which is the cheirality test.
  const Eigen::Matrix3d Km = intrinsic_matrix(K);
  const Eigen::Matrix3d Hrot =
      Km * camera_rotation(src_pose).transpose() * camera_rotation(dst_pose) * Km.inverse();
  const Eigen::Vector3d hz = horizon_line(dst_pose, K);

  WarpResult res;
  res.image = ImageBuffer(K.width, K.height, src.channels());
  res.mask = ImageBuffer(K.width, K.height, 1);
  std::vector<float> px(static_cast<size_t>(src.channels()));
  size_t valid = 0;

  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      double xs = -1.0, ys = -1.0;
      bool ok = false;
      if (hz.x() * u + hz.y() * v + hz.z() < 0.0) {
        // Ground route: reconstruct the plane point seen by the destination
        // pixel, then project it into the source camera.
        const Eigen::Vector3d ph = dst_px_to_plane * Eigen::Vector3d(u, v, 1.0);
        if (std::fabs(ph.z()) > 1e-12) {
          const Eigen::Vector3d plane(ph.x() / ph.z(), ph.y() / ph.z(), 1.0);
          const Eigen::Vector3d q = Hg_src * plane;
          if (q.z() > kMinDepth) {  // third row = source camera depth
            xs = q.x() / q.z();
            ys = q.y() / q.z();
            ok = true;
          }
        }
      } else {
        // At or above the horizon: translation vanishes at infinity.
        const Eigen::Vector3d q = Hrot * Eigen::Vector3d(u, v, 1.0);
        if (q.z() > 1e-12) {  // in front of the source camera
          xs = q.x() / q.z();
          ys = q.y() / q.z();
          ok = true;
        }
      }
      bool sampled = false;
      if (ok) sampled = sample_bilinear(src, xs, ys, px.data());
      if (sampled) {
        for (int ch = 0; ch < src.channels(); ++ch) res.image.at(v, u, ch) = px[ch];
        res.mask.at(v, u, 0) = 1.0f;
        ++valid;
      }
    }
  }
  res.valid_fraction = static_cast<double>(valid) /
                       (static_cast<double>(K.width) * K.height);
  return res;
}

}  // namespace lanesim
