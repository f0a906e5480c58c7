#include <doctest.h>

#include "lanesim/labels.hpp"

using namespace lanesim;

namespace {

ArcPolyline circle_path(double R, double step = 0.05, double arc_frac = 0.75) {
  std::vector<Eigen::Vector2d> pts;
  const double total = 2 * kPi * arc_frac;
  const int n = static_cast<int>(std::ceil(total * R / step));
  for (int i = 0; i <= n; ++i) {
    const double a = total * i / n;
    pts.emplace_back(R * std::cos(a), R * std::sin(a));
  }
  return ArcPolyline(std::move(pts));
}

ArcPolyline straight_path(double len, double step = 0.25) {
  std::vector<Eigen::Vector2d> pts;
  const int n = static_cast<int>(std::ceil(len / step));
  for (int i = 0; i <= n; ++i) pts.emplace_back(len * i / n, 0.0);
  return ArcPolyline(std::move(pts));
}

}  // namespace

TEST_SUITE("labels") {

TEST_CASE("label has 100 points spaced 1 m in arc length") {
  const ArcPolyline path = straight_path(200.0);
  Pose2 v;
  v.x = 30.0;
  const TrajectoryLabel label = extract_local_trajectory(path, v);
  REQUIRE(label.points.size() == 100);
  CHECK(kLabelPointCount == 100);
  CHECK(kLabelSpacingM == 1.0);
  for (int k = 0; k < 100; ++k) {
    CHECK(label.points[k].x() == doctest::Approx(k + 1.0).epsilon(1e-9));
    CHECK(std::abs(label.points[k].y()) < 1e-9);
    CHECK(label.points[k].z() == 0.0);
  }
}

TEST_CASE("circle labels match the closed form") {
  const double R = 120.0;
  const ArcPolyline path = circle_path(R);
  // Vehicle exactly on the circle at angle a0, heading along the tangent.
  const double a0 = 0.8;
  Pose2 v;
  v.x = R * std::cos(a0);
  v.y = R * std::sin(a0);
  v.psi = a0 + kPi / 2;
  const TrajectoryLabel label = extract_local_trajectory(path, v);
  REQUIRE(label.points.size() == 100);
  for (int k = 0; k < 100; ++k) {
    // A point s meters ahead on a ccw circle, in the vehicle frame:
    // x = R sin(s/R), y = R (1 - cos(s/R)).
    const double s = k + 1.0;
    const double want_x = R * std::sin(s / R);
    const double want_y = R * (1 - std::cos(s / R));
    CHECK(std::abs(label.points[k].x() - want_x) < 2e-3);
    CHECK(std::abs(label.points[k].y() - want_y) < 2e-3);
  }
}

TEST_CASE("consecutive label points are about 1 m apart in space") {
  const ArcPolyline path = circle_path(60.0);
  Pose2 v;
  v.x = 60.0;
  v.psi = kPi / 2;
  const TrajectoryLabel label = extract_local_trajectory(path, v);
  for (int k = 1; k < 100; ++k) {
    const double d = (label.points[k] - label.points[k - 1]).norm();
    // Chords of 1 m arc on R = 60: shorter than 1 m by ~s^2/(24 R^2).
    CHECK(d <= 1.0 + 1e-9);
    CHECK(d > 0.999);
  }
}

TEST_CASE("stations past the path end extend along the final tangent") {
  const ArcPolyline path = straight_path(50.0);
  Pose2 v;
  v.x = 10.0;
  const TrajectoryLabel label = extract_local_trajectory(path, v);
  for (int k = 0; k < 100; ++k) {
    CHECK(label.points[k].x() == doctest::Approx(k + 1.0).epsilon(1e-9));
    CHECK(std::abs(label.points[k].y()) < 1e-9);
  }
}

TEST_CASE("vehicle yaw rotates the label frame") {
  const ArcPolyline path = straight_path(200.0);
  Pose2 v;
  v.x = 20.0;
  v.y = 0.0;
  v.psi = 0.3;
  const TrajectoryLabel label = extract_local_trajectory(path, v);
  for (int k = 0; k < 100; k += 9) {
    const double s = k + 1.0;
    // Path point (20 + s, 0) in a frame rotated by 0.3 at (20, 0).
    CHECK(label.points[k].x() == doctest::Approx(s * std::cos(0.3)).epsilon(1e-9));
    CHECK(label.points[k].y() == doctest::Approx(-s * std::sin(0.3)).epsilon(1e-9));
  }
}

TEST_CASE("label stations are anchored at the projection foot") {
  const ArcPolyline path = straight_path(200.0);
  Pose2 v;
  v.x = 30.0;
  v.y = 1.4;  // off the path: stations still measured from the foot at x=30
  const TrajectoryLabel label = extract_local_trajectory(path, v);
  for (int k = 0; k < 100; k += 7) {
    CHECK(label.points[k].x() == doctest::Approx(k + 1.0).epsilon(1e-9));
    CHECK(label.points[k].y() == doctest::Approx(-1.4).epsilon(1e-9));
  }
}

TEST_CASE("poses far from the path are rejected") {
  const ArcPolyline path = straight_path(100.0);
  Pose2 v;
  v.x = 50.0;
  v.y = 2.5;
  CHECK_THROWS_AS(extract_local_trajectory(path, v), RuntimeError);
  v.y = 1.9;
  CHECK_NOTHROW(extract_local_trajectory(path, v));
}

TEST_CASE("correct_label equals the hand-derived rigid transform") {
  const ArcPolyline path = circle_path(90.0);
  Pose2 v;
  v.x = 90.0;
  v.psi = kPi / 2;
  const TrajectoryLabel label = extract_local_trajectory(path, v);
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const double shift = rng.uniform(-1.5, 1.5);
    const double yaw = rng.uniform(-0.3, 0.3);
    const TrajectoryLabel corr = correct_label(label, shift, yaw);
    REQUIRE(corr.points.size() == label.points.size());
    for (size_t k = 0; k < label.points.size(); k += 11) {
      // Shifting the frame right by d moves points left (+y); the frame yaw
      // rotates coordinates by -yaw.
      const double px = label.points[k].x();
      const double py = label.points[k].y() + shift;
      const double cx = std::cos(-yaw) * px - std::sin(-yaw) * py;
      const double cy = std::sin(-yaw) * px + std::cos(-yaw) * py;
      CHECK(corr.points[k].x() == doctest::Approx(cx).epsilon(1e-12));
      CHECK(corr.points[k].y() == doctest::Approx(cy).epsilon(1e-12));
      CHECK(corr.points[k].z() == 0.0);
    }
  }
}

TEST_CASE("correct_label matches re-extraction at the perturbed pose") {
  // On a straight path a lateral shift keeps the projection foot exactly,
  // so the corrected label must equal re-extraction to rounding error.
  const ArcPolyline straight = straight_path(300.0);
  Pose2 v;
  v.x = 40.0;
  Rng rng(102);
  for (int trial = 0; trial < 20; ++trial) {
    const double shift = rng.uniform(-1.2, 1.2);
    const double yaw = rng.uniform(-0.25, 0.25);
    Pose2 p = v;
    p.x += shift * std::sin(v.psi);
    p.y -= shift * std::cos(v.psi);
    p.psi += yaw;
    const TrajectoryLabel re = extract_local_trajectory(straight, p);
    const TrajectoryLabel corr = correct_label(extract_local_trajectory(straight, v), shift, yaw);
    for (size_t k = 0; k < 100; k += 13) {
      CHECK(std::abs(corr.points[k].x() - re.points[k].x()) < 1e-9);
      CHECK(std::abs(corr.points[k].y() - re.points[k].y()) < 1e-9);
    }
  }
  // On a discretized circle the foot can slide by O(shift * step / 2R); the
  // agreement is correspondingly loose but still tight in absolute terms.
  const double R = 150.0;
  const ArcPolyline path = circle_path(R, 0.02);
  const double a0 = 1.1;
  Pose2 c;
  c.x = R * std::cos(a0);
  c.y = R * std::sin(a0);
  c.psi = a0 + kPi / 2;
  const TrajectoryLabel base = extract_local_trajectory(path, c);
  for (int trial = 0; trial < 10; ++trial) {
    const double shift = rng.uniform(-1.2, 1.2);
    const double yaw = rng.uniform(-0.25, 0.25);
    Pose2 p = c;
    p.x += shift * std::sin(c.psi);
    p.y -= shift * std::cos(c.psi);
    p.psi += yaw;
    const TrajectoryLabel re = extract_local_trajectory(path, p);
    const TrajectoryLabel corr = correct_label(base, shift, yaw);
    for (size_t k = 0; k < 100; k += 13) {
      CHECK(std::abs(corr.points[k].x() - re.points[k].x()) < 1e-3);
      CHECK(std::abs(corr.points[k].y() - re.points[k].y()) < 1e-3);
    }
  }
}

TEST_CASE("component views flatten in the right order") {
  TrajectoryLabel label;
  for (int k = 0; k < 100; ++k)
    label.points.emplace_back(k, 100.0 + k, 0.0);
  const auto ys = label.y_components();
  REQUIRE(ys.size() == 100);
  CHECK(ys[0] == 100.0f);
  CHECK(ys[99] == 199.0f);
  const auto xyz = label.flattened_xyz();
  REQUIRE(xyz.size() == 300);
  CHECK(xyz[0] == 0.0f);
  CHECK(xyz[1] == 100.0f);
  CHECK(xyz[2] == 0.0f);
  CHECK(xyz[3 * 41] == 41.0f);
  CHECK(xyz[3 * 41 + 1] == 141.0f);
}

TEST_CASE("midline of two edges is the pointwise midpoint") {
  const ArcPolyline left = circle_path(101.85, 0.05, 0.5);
  const ArcPolyline right = circle_path(98.15, 0.05, 0.5);
  const ArcPolyline mid = centerline_from_edges(left, right);
  // Concentric arcs: the midline must sit at the mean radius.
  for (size_t i = 0; i < mid.size(); i += 29) {
    CHECK(mid.points()[i].norm() == doctest::Approx(100.0).epsilon(1e-4));
  }
}

}  // TEST_SUITE
