#include "lanesim/labels.hpp"

namespace lanesim {

std::vector<float> TrajectoryLabel::y_components() const {
  std::vector<float> out(points.size());
  for (size_t i = 0; i < points.size(); ++i) out[i] = static_cast<float>(points[i].y());
  return out;
}

std::vector<float> TrajectoryLabel::flattened_xyz() const {
  std::vector<float> out(points.size() * 3);
  for (size_t i = 0; i < points.size(); ++i) {
    out[3 * i] = static_cast<float>(points[i].x());
    out[3 * i + 1] = static_cast<float>(points[i].y());
    out[3 * i + 2] = static_cast<float>(points[i].z());
  }
  return out;
}

TrajectoryLabel extract_local_trajectory(const ArcPolyline& path, const Pose2& vehicle) {
  const auto proj = path.project(vehicle.position());
  if (std::fabs(proj.signed_offset) > 2.0)
    throw RuntimeError("extract_local_trajectory: pose more than 2 m from the path");

  TrajectoryLabel label;
  label.points.resize(kLabelPointCount);
  const double len = path.length();
  for (int i = 0; i < kLabelPointCount; ++i) {
    const double s = proj.s + (i + 1) * kLabelSpacingM;
    Eigen::Vector2d p;
    if (s <= len) {
      p = path.point_at(s);
    } else {
      // Extend along the final tangent so lookahead near the recording end
      // stays defined.
      p = path.point_at(len) + (s - len) * path.tangent_at(len);
    }
    const Eigen::Vector2d local = vehicle.to_local(p);
    label.points[i] = Eigen::Vector3d(local.x(), local.y(), 0.0);
  }
  return label;
}

TrajectoryLabel correct_label(const TrajectoryLabel& label, double shift_right, double yaw) {
  // The perturbed vehicle origin sits at (0, -shift_right) in the original
  // vehicle frame, rotated by yaw.
  const double c = std::cos(-yaw), s = std::sin(-yaw);
  TrajectoryLabel out;
  out.points.resize(label.points.size());
  for (size_t i = 0; i < label.points.size(); ++i) {
    const double x = label.points[i].x();
    const double y = label.points[i].y() + shift_right;
    out.points[i] = Eigen::Vector3d(c * x - s * y, s * x + c * y, label.points[i].z());
  }
  return out;
}

ArcPolyline centerline_from_edges(const ArcPolyline& left, const ArcPolyline& right) {
  const size_t n = std::max(left.size(), right.size());
  if (n < 2) throw RuntimeError("centerline_from_edges: degenerate edges");
  std::vector<Eigen::Vector2d> mid(n);
  for (size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    mid[i] = 0.5 * (left.point_at(u * left.length()) + right.point_at(u * right.length()));
  }
  return ArcPolyline(std::move(mid));
}

}  // namespace lanesim
