#pragma once

#include "lanesim/camera.hpp"
#include "lanesim/homography.hpp"
#include "lanesim/image.hpp"

namespace lanesim {

// Region of interest on a standardized image: horizontal field of view
// centered on the forward axis, top edge on the horizon, bottom edge at the
// depth where the ground span equals ground_width_m.
struct RoiSpec {
  double hfov_rad = deg2rad(53.0);
  double ground_width_m = 7.6;
  int out_w = 209;
  int out_h = 65;
};

// ROI extent in continuous raster coordinates (cell convention).
struct RoiGeometry {
  double x0 = 0, x1 = 0;      // horizontal span, centered on the forward axis
  double y_top = 0, y_bottom = 0;
  double px_per_degree = 0;   // output resolution over the horizontal FOV
};

RoiGeometry roi_geometry(const RoiSpec& roi, const CameraIntrinsics& K,
                         const CameraPose& camera);

// Per-row source-cell sizes for the trapezoidal multi-resolution patch:
// width dW(j) = aw*j + bw and height dH(j) = ah*j + bh for output row j,
// both linear in j (rows counted from the top).
struct SourceAreaCoeffs {
  double aw = 0, bw = 0, ah = 0, bh = 0;

  double width_at(int j) const { return aw * j + bw; }
  double height_at(int j) const { return ah * j + bh; }
  // Top edge of row j relative to the patch top: sum of the previous rows'
  // heights, in closed form.
  double row_top(int j) const { return bh * j + ah * j * (j - 1) / 2.0; }
};

struct MultiResSpec {
  int patch_w = 0, patch_h = 0;
  double ratio_w = 1.0;  // bottom-row cell width / top-row cell width
  double ratio_h = 1.0;  // bottom-row cell height / top-row cell height
  double roi_bottom_width_px = 0;  // bottom row's total source span
  double roi_height_px = 0;        // sum of all row heights
};

// Closed-form solution of the six patch constraints: the bottom row tiles the
// ROI bottom width, the width and height ratios are met, the rows sum to the
// ROI height, and both cell dimensions are linear in the row index.
SourceAreaCoeffs solve_multires_coeffs(const MultiResSpec& spec);

// Exact box-average resampling of a trapezoidal source region: row j spans
// patch_w cells of size width_at(j) x height_at(j), centered horizontally on
// axis_x, rows stacked downward from top_y.
ImageBuffer resample_trapezoid(const ImageBuffer& src, double axis_x, double top_y,
                               const SourceAreaCoeffs& coeffs, int patch_w, int patch_h);

// Uniform ROI downsample. Implemented as the ratio-1 trapezoid, so it is
// bit-identical to a multi-res patch with both ratios equal to 1.
ImageBuffer crop_roi(const ImageBuffer& src, const CameraIntrinsics& K,
                     const CameraPose& camera, const RoiSpec& roi);

struct MultiResPatchSpec {
  RoiSpec roi;
  int patch_w = 209, patch_h = 113;
  double ratio_w = 2.0, ratio_h = 8.0;
};

ImageBuffer build_multires_patch(const ImageBuffer& src, const CameraIntrinsics& K,
                                 const CameraPose& camera, const MultiResPatchSpec& spec);

// What the policy consumes; selects between the uniform ROI crop and the
// multi-res trapezoid and fixes the patch raster size.
struct PatchSpec {
  enum class Kind : uint32_t { regular = 0, multires = 1 };
  Kind kind = Kind::regular;
  RoiSpec roi;
  int out_w = 52, out_h = 16;
  double ratio_w = 2.0, ratio_h = 8.0;  // multires only

  int channels_hint = 3;
  size_t feature_count() const {
    return static_cast<size_t>(out_w) * out_h * channels_hint;
  }
};

ImageBuffer build_patch(const ImageBuffer& std_image, const CameraIntrinsics& K,
                        const CameraPose& camera, const PatchSpec& spec);

}  // namespace lanesim
