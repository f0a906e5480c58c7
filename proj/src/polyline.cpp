#include "lanesim/polyline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lanesim {

ArcPolyline::ArcPolyline(std::vector<Eigen::Vector2d> points) : pts_(std::move(points)) {
  if (pts_.size() < 2) throw RuntimeError("ArcPolyline: need at least two points");
  s_.resize(pts_.size());
  s_[0] = 0.0;
  for (size_t i = 1; i < pts_.size(); ++i) {
    const double d = (pts_[i] - pts_[i - 1]).norm();
    if (d <= 0.0) throw RuntimeError("ArcPolyline: duplicate consecutive points");
    s_[i] = s_[i - 1] + d;
  }
  build_index();
}

void ArcPolyline::build_index() {
  double max_seg = 0.0;
  for (size_t i = 1; i < pts_.size(); ++i)
    max_seg = std::max(max_seg, s_[i] - s_[i - 1]);
  cell_ = std::max(2.0, 2.0 * max_seg);
  for (size_t i = 0; i + 1 < pts_.size(); ++i) {
    const Eigen::Vector2d& a = pts_[i];
    const Eigen::Vector2d& b = pts_[i + 1];
    const int64_t x0 = static_cast<int64_t>(std::floor(std::min(a.x(), b.x()) / cell_));
    const int64_t x1 = static_cast<int64_t>(std::floor(std::max(a.x(), b.x()) / cell_));
    const int64_t y0 = static_cast<int64_t>(std::floor(std::min(a.y(), b.y()) / cell_));
    const int64_t y1 = static_cast<int64_t>(std::floor(std::max(a.y(), b.y()) / cell_));
    for (int64_t ix = x0; ix <= x1; ++ix)
      for (int64_t iy = y0; iy <= y1; ++iy)
        grid_[cell_key(ix, iy)].push_back(static_cast<uint32_t>(i));
  }
}

size_t ArcPolyline::segment_index_at(double s) const {
  if (s <= 0.0) return 0;
  if (s >= s_.back()) return pts_.size() - 2;
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  return static_cast<size_t>(it - s_.begin()) - 1;
}

Eigen::Vector2d ArcPolyline::point_at(double s) const {
  const size_t i = segment_index_at(s);
  const double seg_len = s_[i + 1] - s_[i];
  const double t = std::clamp((s - s_[i]) / seg_len, 0.0, 1.0);
  return pts_[i] + t * (pts_[i + 1] - pts_[i]);
}

Eigen::Vector2d ArcPolyline::tangent_at(double s) const {
  const size_t i = segment_index_at(s);
  return (pts_[i + 1] - pts_[i]).normalized();
}

double ArcPolyline::heading_at(double s) const {
  const Eigen::Vector2d t = tangent_at(s);
  return std::atan2(t.y(), t.x());
}

namespace {

// Squared distance from p to segment [a, b] plus the clamped parameter.
inline double point_segment_dist2(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                  const Eigen::Vector2d& b, double* t_out) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  *t_out = t;
  return (p - (a + t * ab)).squaredNorm();
}

}  // namespace

ArcPolyline::Projection ArcPolyline::project(const Eigen::Vector2d& p) const {
  const int64_t cx = static_cast<int64_t>(std::floor(p.x() / cell_));
  const int64_t cy = static_cast<int64_t>(std::floor(p.y() / cell_));

  double best_d2 = std::numeric_limits<double>::infinity();
  size_t best_seg = 0;
  double best_t = 0;

  // Expanding ring search. Once a candidate is found, rings farther than the
  // current best distance (plus one cell of slack for bbox padding) cannot
  // improve it.
  const int64_t max_ring = 1 + static_cast<int64_t>(4e6 / cell_);
  for (int64_t ring = 0; ring <= max_ring; ++ring) {
    bool any_cell = false;
    for (int64_t ix = cx - ring; ix <= cx + ring; ++ix) {
      for (int64_t iy = cy - ring; iy <= cy + ring; ++iy) {
        if (std::max(std::llabs(ix - cx), std::llabs(iy - cy)) != ring) continue;
        const auto it = grid_.find(cell_key(ix, iy));
        if (it == grid_.end()) continue;
        any_cell = true;
        for (uint32_t seg : it->second) {
          double t;
          const double d2 = point_segment_dist2(p, pts_[seg], pts_[seg + 1], &t);
          if (d2 < best_d2 || (d2 == best_d2 && seg < best_seg)) {
            best_d2 = d2;
            best_seg = seg;
            best_t = t;
          }
        }
      }
    }
    (void)any_cell;
    if (std::isfinite(best_d2)) {
      const double ring_clearance = (static_cast<double>(ring)) * cell_;
      if (ring_clearance > std::sqrt(best_d2) + cell_) break;
    }
  }
  if (!std::isfinite(best_d2)) {
    // Degenerate fallback: scan everything (index miss cannot occur for
    // points within max_ring cells, but stay safe).
    for (size_t seg = 0; seg + 1 < pts_.size(); ++seg) {
      double t;
      const double d2 = point_segment_dist2(p, pts_[seg], pts_[seg + 1], &t);
      if (d2 < best_d2) {
        best_d2 = d2;
        best_seg = seg;
        best_t = t;
      }
    }
  }

  Projection out;
  const Eigen::Vector2d a = pts_[best_seg];
  const Eigen::Vector2d b = pts_[best_seg + 1];
  out.closest = a + best_t * (b - a);
  out.s = s_[best_seg] + best_t * (s_[best_seg + 1] - s_[best_seg]);
  const Eigen::Vector2d tang = (b - a).normalized();
  const Eigen::Vector2d d = p - out.closest;
  const double lateral = -tang.y() * d.x() + tang.x() * d.y();
  const double dist = std::sqrt(best_d2);
  out.signed_offset = (lateral >= 0) ? dist : -dist;
  return out;
}

ArcPolyline::Projection ArcPolyline::project_hinted(const Eigen::Vector2d& p,
                                                    size_t* hint_seg) const {
  const size_t n_seg = pts_.size() - 1;
  size_t seg = std::min(*hint_seg, n_seg - 1);
  double t_best;
  double d2 = point_segment_dist2(p, pts_[seg], pts_[seg + 1], &t_best);
  // Descend along the segment index while the neighbor is strictly closer.
  for (size_t guard = 0; guard < n_seg; ++guard) {
    bool moved = false;
    if (seg > 0) {
      double t;
      const double d2m = point_segment_dist2(p, pts_[seg - 1], pts_[seg], &t);
      if (d2m < d2) {
        d2 = d2m;
        t_best = t;
        --seg;
        moved = true;
      }
    }
    if (!moved && seg + 1 < n_seg) {
      double t;
      const double d2p = point_segment_dist2(p, pts_[seg + 1], pts_[seg + 2], &t);
      if (d2p < d2) {
        d2 = d2p;
        t_best = t;
        ++seg;
        moved = true;
      }
    }
    if (!moved) break;
  }
  *hint_seg = seg;
  Projection out;
  const Eigen::Vector2d a = pts_[seg];
  const Eigen::Vector2d b = pts_[seg + 1];
  out.closest = a + t_best * (b - a);
  out.s = s_[seg] + t_best * (s_[seg + 1] - s_[seg]);
  const Eigen::Vector2d tang = (b - a).normalized();
  const Eigen::Vector2d d = p - out.closest;
  const double lateral = -tang.y() * d.x() + tang.x() * d.y();
  const double dist = std::sqrt(d2);
  out.signed_offset = (lateral >= 0) ? dist : -dist;
  return out;
}

ArcPolyline ArcPolyline::offset(double offset_left) const {
  std::vector<Eigen::Vector2d> out(pts_.size());
  for (size_t i = 0; i < pts_.size(); ++i) {
    Eigen::Vector2d n;
    if (i == 0) {
      const Eigen::Vector2d t = (pts_[1] - pts_[0]).normalized();
      n = {-t.y(), t.x()};
    } else if (i + 1 == pts_.size()) {
      const Eigen::Vector2d t = (pts_[i] - pts_[i - 1]).normalized();
      n = {-t.y(), t.x()};
    } else {
      const Eigen::Vector2d t0 = (pts_[i] - pts_[i - 1]).normalized();
      const Eigen::Vector2d t1 = (pts_[i + 1] - pts_[i]).normalized();
      Eigen::Vector2d bis = t0 + t1;
      if (bis.norm() < 1e-12) {
        bis = {-t0.y(), t0.x()};
      } else {
        bis.normalize();
        bis = {-bis.y(), bis.x()};
      }
      n = bis;
    }
    out[i] = pts_[i] + offset_left * n;
  }
  return ArcPolyline(std::move(out));
}

}  // namespace lanesim
