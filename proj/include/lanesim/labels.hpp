#pragma once

#include "lanesim/polyline.hpp"

namespace lanesim {

enum class Maneuver : uint8_t { lane_follow = 0, fork_left = 1, fork_right = 2 };

constexpr int kLabelPointCount = 100;
constexpr double kLabelSpacingM = 1.0;

// 100 path points ahead of the vehicle, spaced exactly 1 m apart in arc
// length, expressed in the vehicle frame (x forward, y left, z up; the world
// is flat so z = 0).
struct TrajectoryLabel {
  std::vector<Eigen::Vector3d> points;  // size kLabelPointCount

  std::vector<float> y_components() const;
  std::vector<float> flattened_xyz() const;
};

// Extract the label for a vehicle pose against a reference path. The pose
// must be within 2 m of the path; stations past the path end are extended
// along the final tangent.
TrajectoryLabel extract_local_trajectory(const ArcPolyline& path, const Pose2& vehicle);

// Shift the vehicle `shift_right` to the right and rotate it by `yaw` and
// re-express a label in the perturbed frame. This is the augmentation
// label-correction rule; it is the exact rigid-transform counterpart of
// extracting at the perturbed pose.
TrajectoryLabel correct_label(const TrajectoryLabel& label, double shift_right, double yaw);

// Lane centerline as the pointwise midpoint of the two edge lines at
// proportional stations.
ArcPolyline centerline_from_edges(const ArcPolyline& left, const ArcPolyline& right);

}  // namespace lanesim
