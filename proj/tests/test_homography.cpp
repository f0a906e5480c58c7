#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "lanesim/homography.hpp"

using namespace lanesim;

namespace {

// DLT: least-squares homography through point correspondences, independent
// of the closed-form construction under test.
Eigen::Matrix3d fit_homography(const std::vector<Eigen::Vector2d>& from,
                               const std::vector<Eigen::Vector2d>& to) {
  REQUIRE(from.size() == to.size());
  REQUIRE(from.size() >= 4);
  Eigen::MatrixXd A(2 * from.size(), 9);
  for (size_t i = 0; i < from.size(); ++i) {
    const double x = from[i].x(), y = from[i].y();
    const double u = to[i].x(), v = to[i].y();
    A.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
    A.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y, -v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d H;
  H << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  return H;
}

double homography_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d an = normalize_homography(a);
  const Eigen::Matrix3d bn = normalize_homography(b);
  return (an - bn).norm();
}

CameraPose random_camera(Rng& rng) {
  CameraPose cam;
  cam.position = {rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(1.0, 2.5)};
  cam.yaw = rng.uniform(-0.6, 0.6);
  cam.pitch_down = rng.uniform(-0.05, 0.3);
  cam.roll = rng.uniform(-0.15, 0.15);
  return cam;
}

}  // namespace

TEST_SUITE("homography") {

TEST_CASE("ground homography agrees with direct projection of plane points") {
  Rng rng(21);
  const CameraIntrinsics K = standard_intrinsics();
  for (int trial = 0; trial < 50; ++trial) {
    const CameraPose cam = random_camera(rng);
    const Eigen::Matrix3d H = ground_plane_homography(cam, K);
    for (int i = 0; i < 30; ++i) {
      const Eigen::Vector3d p(rng.uniform(-10, 60), rng.uniform(-25, 25), 0.0);
      Eigen::Vector2d px;
      if (!project_point(cam, K, p, &px)) continue;
      const Eigen::Vector3d h = H * Eigen::Vector3d(p.x(), p.y(), 1.0);
      REQUIRE(h.z() > 0);
      CHECK(std::abs(h.x() / h.z() - px.x()) < 1e-9 * (1.0 + std::abs(px.x())));
      CHECK(std::abs(h.y() / h.z() - px.y()) < 1e-9 * (1.0 + std::abs(px.y())));
    }
  }
}

TEST_CASE("ground homography third row is the camera depth of the plane point") {
  Rng rng(22);
  const CameraIntrinsics K = standard_intrinsics();
  for (int trial = 0; trial < 20; ++trial) {
    const CameraPose cam = random_camera(rng);
    const Eigen::Matrix3d H = ground_plane_homography(cam, K);
    const Eigen::Matrix3d R = camera_rotation(cam);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector3d p(rng.uniform(-10, 40), rng.uniform(-20, 20), 0.0);
      const double depth = (R.transpose() * (p - cam.position)).z();
      const Eigen::Vector3d h = H * Eigen::Vector3d(p.x(), p.y(), 1.0);
      CHECK(h.z() == doctest::Approx(depth).epsilon(1e-10));
    }
  }
}

TEST_CASE("pixel-to-pixel ground warp matches a least-squares fit") {
  Rng rng(23);
  const CameraIntrinsics K = standard_intrinsics();
  for (int trial = 0; trial < 25; ++trial) {
    const CameraPose src = random_camera(rng);
    const CameraPose dst = random_camera(rng);
    // Correspondences via the ground plane: pick ground points seen by both.
    std::vector<Eigen::Vector2d> from, to;
    for (int i = 0; from.size() < 24 && i < 4000; ++i) {
      const Eigen::Vector3d p(rng.uniform(2, 70), rng.uniform(-30, 30), 0.0);
      Eigen::Vector2d a, b;
      if (project_point(src, K, p, &a) && project_point(dst, K, p, &b)) {
        from.push_back(a);
        to.push_back(b);
      }
    }
    REQUIRE(from.size() >= 24);
    const Eigen::Matrix3d fitted = fit_homography(from, to);
    const Eigen::Matrix3d produced = ground_warp_homography(src, dst, K);
    CHECK(homography_distance(fitted, produced) < 1e-7);
  }
}

TEST_CASE("identity warp collapses to the identity matrix") {
  Rng rng(24);
  const CameraIntrinsics K = standard_intrinsics();
  for (int i = 0; i < 10; ++i) {
    const CameraPose cam = random_camera(rng);
    const Eigen::Matrix3d Hg = normalize_homography(ground_warp_homography(cam, cam, K));
    const Eigen::Matrix3d Hr = normalize_homography(rotation_warp_homography(cam, cam, K));
    const Eigen::Matrix3d I = normalize_homography(Eigen::Matrix3d::Identity());
    CHECK((Hg - I).norm() < 1e-12);
    CHECK((Hr - I).norm() < 1e-12);
  }
}

TEST_CASE("ground warps compose: A->B->C equals A->C") {
  Rng rng(25);
  const CameraIntrinsics K = standard_intrinsics();
  for (int i = 0; i < 15; ++i) {
    const CameraPose a = random_camera(rng);
    const CameraPose b = random_camera(rng);
    const CameraPose c = random_camera(rng);
    const Eigen::Matrix3d ab = ground_warp_homography(a, b, K);
    const Eigen::Matrix3d bc = ground_warp_homography(b, c, K);
    const Eigen::Matrix3d ac = ground_warp_homography(a, c, K);
    CHECK(homography_distance(bc * ab, ac) < 1e-10);
  }
}

TEST_CASE("rotation warp is exact for distant points regardless of translation") {
  Rng rng(26);
  const CameraIntrinsics K = standard_intrinsics();
  for (int trial = 0; trial < 15; ++trial) {
    CameraPose src = random_camera(rng);
    CameraPose dst = src;
    dst.position += Eigen::Vector3d(rng.uniform(-2, 2), rng.uniform(-2, 2), 0);
    dst.yaw += rng.uniform(-0.2, 0.2);
    dst.pitch_down += rng.uniform(-0.1, 0.1);
    const Eigen::Matrix3d H = rotation_warp_homography(src, dst, K);
    for (int i = 0; i < 10; ++i) {
      // A very distant elevated point: translation is negligible.
      Eigen::Vector3d dir(rng.uniform(0.5, 1.0), rng.uniform(-0.5, 0.5),
                          rng.uniform(0.05, 0.4));
      const Eigen::Vector3d p = src.position + dir.normalized() * 1e9;
      Eigen::Vector2d a, b;
      if (!project_point(src, K, p, &a) || !project_point(dst, K, p, &b)) continue;
      const Eigen::Vector3d h = H * Eigen::Vector3d(a.x(), a.y(), 1.0);
      REQUIRE(std::abs(h.z()) > 0);
      CHECK(std::abs(h.x() / h.z() - b.x()) < 1e-5);
      CHECK(std::abs(h.y() / h.z() - b.y()) < 1e-5);
    }
  }
}

TEST_CASE("horizon line separates ground rays from sky rays") {
  Rng rng(27);
  const CameraIntrinsics K = standard_intrinsics();
  for (int trial = 0; trial < 20; ++trial) {
    const CameraPose cam = random_camera(rng);
    const Eigen::Vector3d line = horizon_line(cam, K);
    const Eigen::Matrix3d R = camera_rotation(cam);
    const Eigen::Matrix3d Kinv = intrinsic_matrix(K).inverse();
    for (int i = 0; i < 200; ++i) {
      const double u = rng.uniform(-0.5, K.width - 0.5);
      const double v = rng.uniform(-0.5, K.height - 0.5);
      const Eigen::Vector3d ray = R * (Kinv * Eigen::Vector3d(u, v, 1.0));
      const double side = line.dot(Eigen::Vector3d(u, v, 1.0));
      if (std::abs(ray.z()) < 1e-9) continue;  // numerically on the horizon
      CHECK((ray.z() < 0) == (side < 0));
    }
    // horizon_row_at lies on the line.
    const double u0 = 42.0;
    const double v0 = horizon_row_at(line, u0);
    CHECK(std::abs(line.dot(Eigen::Vector3d(u0, v0, 1.0))) < 1e-9);
  }
}

TEST_CASE("normalization fixes scale and sign") {
  Eigen::Matrix3d H;
  H << 2, 0, 1, 0, 3, -4, 0.5, 0, 9;
  const Eigen::Matrix3d n1 = normalize_homography(H);
  const Eigen::Matrix3d n2 = normalize_homography(-3.7 * H);
  CHECK((n1 - n2).norm() < 1e-14);
  CHECK(n1.norm() == doctest::Approx(1.0));
  double max_abs = 0;
  double max_val = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (std::abs(n1(r, c)) > max_abs) {
        max_abs = std::abs(n1(r, c));
        max_val = n1(r, c);
      }
  CHECK(max_val > 0);
}

}  // TEST_SUITE
