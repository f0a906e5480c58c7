#pragma once

#include <Eigen/Dense>
#include <unordered_map>
#include <vector>

#include "lanesim/common.hpp"

namespace lanesim {

// Planar rigid pose: position + heading. World frame is x/y on the ground,
// heading positive counterclockwise (left).
struct Pose2 {
  double x = 0, y = 0, psi = 0;

  Eigen::Vector2d position() const { return {x, y}; }
  Eigen::Vector2d forward() const { return {std::cos(psi), std::sin(psi)}; }
  Eigen::Vector2d left() const { return {-std::sin(psi), std::cos(psi)}; }

  Eigen::Vector2d to_world(const Eigen::Vector2d& local) const {
    return position() + forward() * local.x() + left() * local.y();
  }
  Eigen::Vector2d to_local(const Eigen::Vector2d& world) const {
    const Eigen::Vector2d d = world - position();
    return {forward().dot(d), left().dot(d)};
  }
};

// Immutable planar polyline parameterized by cumulative arc length, with a
// uniform-grid spatial index for nearest-point projection.
class ArcPolyline {
 public:
  ArcPolyline() = default;
  explicit ArcPolyline(std::vector<Eigen::Vector2d> points);

  size_t size() const { return pts_.size(); }
  const std::vector<Eigen::Vector2d>& points() const { return pts_; }
  const std::vector<double>& stations() const { return s_; }
  double length() const { return s_.empty() ? 0.0 : s_.back(); }

  // Clamped arc-length interpolation.
  Eigen::Vector2d point_at(double s) const;
  // Unit tangent of the containing segment (next segment at vertices).
  Eigen::Vector2d tangent_at(double s) const;
  double heading_at(double s) const;

  struct Projection {
    double s = 0;              // station of the closest point
    double signed_offset = 0;  // positive left of the travel direction
    Eigen::Vector2d closest = Eigen::Vector2d::Zero();
  };
  // Globally nearest point on the polyline.
  Projection project(const Eigen::Vector2d& p) const;

  // Nearest point found by monotone descent from *hint_seg (updated on
  // return). Exact whenever the distance-versus-segment profile is unimodal
  // from the hint, which holds for smooth non-self-approaching roads and a
  // hint tracking a spatially coherent query sequence. Used by the
  // renderer's per-pixel road-frame lookups; exactness-critical callers use
  // project().
  Projection project_hinted(const Eigen::Vector2d& p, size_t* hint_seg) const;

  // Pointwise lateral offset: each vertex moved offset_left along its unit
  // normal (angle bisector at interior vertices), so corresponding vertices
  // are exactly |offset_left| apart.
  ArcPolyline offset(double offset_left) const;

 private:
  std::vector<Eigen::Vector2d> pts_;
  std::vector<double> s_;

  // Spatial index: cell -> segment indices whose bounding box touches it.
  std::unordered_map<int64_t, std::vector<uint32_t>> grid_;
  double cell_ = 4.0;
  int64_t cell_key(int64_t ix, int64_t iy) const { return ix * 0x100000000ll + iy; }
  void build_index();
  size_t segment_index_at(double s) const;
};

}  // namespace lanesim
