#pragma once

#include "lanesim/homography.hpp"
#include "lanesim/image.hpp"

namespace lanesim {

struct WarpResult {
  ImageBuffer image;
  ImageBuffer mask;       // 1 channel; 1.0 where the sample came from valid source
  double valid_fraction;  // mean of mask
};

// Resample a distorted source image onto an ideal pinhole raster. For each
// destination pixel the ideal ray is distorted through the lens model and
// sampled bilinearly from the source; out-of-source pixels are zero.
ImageBuffer rectify_pinhole(const ImageBuffer& src, const LensModel& lens,
                            const CameraIntrinsics& src_K, const CameraIntrinsics& dst_K);

// Re-render the source view from a new camera pose under the flat-ground
// assumption: destination pixels below the destination horizon go through
// the ground-plane homography, pixels at or above it through the
// rotation-only (infinity) homography. The two agree on the horizon line
// itself, so the seam is continuous. Raised objects acquire parallax
// artifacts by construction; out-of-source or behind-camera samples are
// zero-filled and excluded from the validity mask.
WarpResult warp_viewpoint(const ImageBuffer& src, const CameraPose& src_pose,
                          const CameraPose& dst_pose, const CameraIntrinsics& K);

}  // namespace lanesim
