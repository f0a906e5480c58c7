#include "lanesim/patches.hpp"

namespace lanesim {

RoiGeometry roi_geometry(const RoiSpec& roi, const CameraIntrinsics& K,
                         const CameraPose& camera) {
  if (!(roi.hfov_rad > 0 && roi.hfov_rad < kPi))
    throw ConfigError("roi_geometry: hfov must be in (0, pi)");
  if (roi.ground_width_m <= 0 || roi.out_w <= 0 || roi.out_h <= 0)
    throw ConfigError("roi_geometry: invalid ROI spec");

  RoiGeometry g;
  const double half_tan = std::tan(roi.hfov_rad / 2.0);
  const double half_px = K.fx * half_tan;
  g.x0 = K.cx - half_px;
  g.x1 = K.cx + half_px;

  const Eigen::Vector3d hz = horizon_line(camera, K);
  g.y_top = horizon_row_at(hz, K.cx);

  // Ground point on the camera's forward ground line at the depth where the
  // FOV spans ground_width_m.
  const double depth = roi.ground_width_m / (2.0 * half_tan);
  const Eigen::Vector3d fwd(std::cos(camera.yaw), std::sin(camera.yaw), 0.0);
  const Eigen::Vector3d ground_pt =
      Eigen::Vector3d(camera.position.x(), camera.position.y(), 0.0) + depth * fwd;
  Eigen::Vector2d px;
  if (!project_point(camera, K, ground_pt, &px))
    throw RuntimeError("roi_geometry: ROI bottom point behind the camera");
  g.y_bottom = px.y();

  if (!(g.y_bottom > g.y_top))
    throw RuntimeError("roi_geometry: ROI has non-positive height");
  g.px_per_degree = roi.out_w / rad2deg(roi.hfov_rad);
  return g;
}

SourceAreaCoeffs solve_multires_coeffs(const MultiResSpec& spec) {
  if (spec.patch_w <= 0 || spec.patch_h <= 0)
    throw ConfigError("solve_multires_coeffs: patch dims must be positive");
  if (spec.ratio_w < 1.0 || spec.ratio_h < 1.0)
    throw ConfigError("solve_multires_coeffs: ratios must be >= 1");
  if (spec.roi_bottom_width_px <= 0 || spec.roi_height_px <= 0)
    throw ConfigError("solve_multires_coeffs: ROI extent must be positive");
  if (spec.patch_h == 1 && (spec.ratio_w != 1.0 || spec.ratio_h != 1.0))
    throw ConfigError("solve_multires_coeffs: single-row patch requires ratios of 1");

  SourceAreaCoeffs c;
  const double bottom_w = spec.roi_bottom_width_px / spec.patch_w;  // dW(patch_h-1)
  c.bw = bottom_w / spec.ratio_w;                                   // dW(0)
  c.aw = (spec.patch_h == 1) ? 0.0 : (bottom_w - c.bw) / (spec.patch_h - 1);
  c.bh = 2.0 * spec.roi_height_px / (spec.patch_h * (1.0 + spec.ratio_h));  // dH(0)
  c.ah = (spec.patch_h == 1) ? 0.0 : (spec.ratio_h - 1.0) * c.bh / (spec.patch_h - 1);
  return c;
}

ImageBuffer resample_trapezoid(const ImageBuffer& src, double axis_x, double top_y,
                               const SourceAreaCoeffs& coeffs, int patch_w, int patch_h) {
  ImageBuffer out(patch_w, patch_h, src.channels());
  double acc[16];
  for (int j = 0; j < patch_h; ++j) {
    const double dw = coeffs.width_at(j);
    const double dh = coeffs.height_at(j);
    const double y0 = top_y + coeffs.row_top(j);
    const double y1 = y0 + dh;
    const double x_start = axis_x - patch_w * dw / 2.0;
    for (int i = 0; i < patch_w; ++i) {
      const double x0 = x_start + i * dw;
      box_average(src, x0, x0 + dw, y0, y1, acc);
      for (int ch = 0; ch < src.channels(); ++ch)
        out.at(j, i, ch) = static_cast<float>(acc[ch]);
    }
  }
  return out;
}

ImageBuffer crop_roi(const ImageBuffer& src, const CameraIntrinsics& K,
                     const CameraPose& camera, const RoiSpec& roi) {
  const RoiGeometry g = roi_geometry(roi, K, camera);
  if (g.x0 < -0.5 || g.x1 > K.width - 0.5 || g.y_top < -0.5 || g.y_bottom > K.height - 0.5)
    throw ConfigError("crop_roi: ROI extends outside the raster");
  SourceAreaCoeffs c;
  c.aw = 0.0;
  c.bw = (g.x1 - g.x0) / roi.out_w;
  c.ah = 0.0;
  c.bh = (g.y_bottom - g.y_top) / roi.out_h;
  return resample_trapezoid(src, K.cx, g.y_top, c, roi.out_w, roi.out_h);
}

ImageBuffer build_multires_patch(const ImageBuffer& src, const CameraIntrinsics& K,
                                 const CameraPose& camera, const MultiResPatchSpec& spec) {
  const RoiGeometry g = roi_geometry(spec.roi, K, camera);
  MultiResSpec ms;
  ms.patch_w = spec.patch_w;
  ms.patch_h = spec.patch_h;
  ms.ratio_w = spec.ratio_w;
  ms.ratio_h = spec.ratio_h;
  ms.roi_bottom_width_px = g.x1 - g.x0;
  ms.roi_height_px = g.y_bottom - g.y_top;
  const SourceAreaCoeffs c = solve_multires_coeffs(ms);
  const double x_span = spec.patch_w * c.width_at(spec.patch_h - 1);
  if (K.cx - x_span / 2.0 < -0.5 || K.cx + x_span / 2.0 > K.width - 0.5 ||
      g.y_top < -0.5 || g.y_bottom > K.height - 0.5)
    throw ConfigError("build_multires_patch: patch extends outside the raster");
  return resample_trapezoid(src, K.cx, g.y_top, c, spec.patch_w, spec.patch_h);
}

ImageBuffer build_patch(const ImageBuffer& std_image, const CameraIntrinsics& K,
                        const CameraPose& camera, const PatchSpec& spec) {
  if (spec.kind == PatchSpec::Kind::regular) {
    RoiSpec roi = spec.roi;
    roi.out_w = spec.out_w;
    roi.out_h = spec.out_h;
    return crop_roi(std_image, K, camera, roi);
  }
  MultiResPatchSpec ms;
  ms.roi = spec.roi;
  ms.patch_w = spec.out_w;
  ms.patch_h = spec.out_h;
  ms.ratio_w = spec.ratio_w;
  ms.ratio_h = spec.ratio_h;
  return build_multires_patch(std_image, K, camera, ms);
}

}  // namespace lanesim
