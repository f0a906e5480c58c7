#include <doctest.h>

#include <Eigen/Dense>

#include "lanesim/camera.hpp"
#include "lanesim/world.hpp"

using namespace lanesim;

namespace {

// Hand-rolled elementary rotations, kept independent of the production code.
Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}
Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

}  // namespace

TEST_SUITE("camera") {

TEST_CASE("standard camera constants") {
  const CameraIntrinsics K = standard_intrinsics();
  CHECK(K.fx == 200.0);
  CHECK(K.fy == 200.0);
  CHECK(K.cx == 104.0);
  CHECK(K.cy == 56.0);
  CHECK(K.width == 208);
  CHECK(K.height == 112);
  const CameraPose mount = standard_camera_mount();
  CHECK(mount.position.x() == 1.77);
  CHECK(mount.position.y() == 0.0);
  CHECK(mount.position.z() == 1.47);
  CHECK(mount.yaw == 0.0);
  CHECK(mount.pitch_down == 0.0);
  CHECK(mount.roll == 0.0);
}

TEST_CASE("body rotation is Rz(yaw) Ry(pitch_down) Rx(roll)") {
  CameraPose p;
  p.yaw = 0.3;
  p.pitch_down = 0.2;
  p.roll = -0.1;
  const Eigen::Matrix3d want = rot_z(0.3) * rot_y(0.2) * rot_x(-0.1);
  CHECK((body_rotation(p) - want).norm() < 1e-14);
}

TEST_CASE("optical axes: +z_cam forward, +x_cam right, +y_cam down") {
  CameraPose p;  // unrotated
  const Eigen::Matrix3d R = camera_rotation(p);
  CHECK((R.col(2) - Eigen::Vector3d::UnitX()).norm() < 1e-14);   // forward
  CHECK((R.col(0) + Eigen::Vector3d::UnitY()).norm() < 1e-14);   // right = -y
  CHECK((R.col(1) + Eigen::Vector3d::UnitZ()).norm() < 1e-14);   // down = -z
  CHECK(std::abs(R.determinant() - 1.0) < 1e-14);
}

TEST_CASE("positive pitch_down moves the forward axis below horizontal") {
  CameraPose p;
  p.pitch_down = 0.25;
  const Eigen::Vector3d fwd = camera_rotation(p).col(2);
  CHECK(fwd.z() < 0.0);
  CHECK(fwd.x() == doctest::Approx(std::cos(0.25)));
}

TEST_CASE("projection formula and principal point") {
  CameraPose cam;
  cam.position = {0, 0, 1.5};
  const CameraIntrinsics K = standard_intrinsics();
  Eigen::Vector2d px;
  // A point straight ahead on the optical axis hits the principal point.
  REQUIRE(project_point(cam, K, {10.0, 0.0, 1.5}, &px));
  CHECK(px.x() == doctest::Approx(104.0));
  CHECK(px.y() == doctest::Approx(56.0));
  // One meter left at 10 m depth: u = cx - fx/10; ground drop: v = cy + fy*1.5/10.
  REQUIRE(project_point(cam, K, {10.0, 1.0, 1.5}, &px));
  CHECK(px.x() == doctest::Approx(104.0 - 20.0));
  REQUIRE(project_point(cam, K, {10.0, 0.0, 0.0}, &px));
  CHECK(px.y() == doctest::Approx(56.0 + 30.0));
}

TEST_CASE("projection rejects points behind the camera") {
  CameraPose cam;
  cam.position = {0, 0, 1.5};
  Eigen::Vector2d px;
  CHECK_FALSE(project_point(cam, standard_intrinsics(), {-1.0, 0.0, 1.5}, &px));
  CHECK_FALSE(project_point(cam, standard_intrinsics(), {0.0, 0.0, 1.5}, &px));
}

TEST_CASE("projection against a hand-rolled reference on random poses") {
  Rng rng(17);
  const CameraIntrinsics K = standard_intrinsics();
  for (int i = 0; i < 200; ++i) {
    CameraPose cam;
    cam.position = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.5, 3)};
    cam.yaw = rng.uniform(-kPi, kPi);
    cam.pitch_down = rng.uniform(-0.4, 0.4);
    cam.roll = rng.uniform(-0.3, 0.3);
    // Reference: world -> body -> optical -> pixel.
    const Eigen::Matrix3d Rb = rot_z(cam.yaw) * rot_y(cam.pitch_down) * rot_x(cam.roll);
    const Eigen::Vector3d p(rng.uniform(-20, 40), rng.uniform(-20, 20), rng.uniform(0, 4));
    const Eigen::Vector3d body = Rb.transpose() * (p - cam.position);
    const Eigen::Vector3d opt(-body.y(), -body.z(), body.x());
    Eigen::Vector2d px;
    const bool ok = project_point(cam, K, p, &px);
    if (opt.z() <= 1e-6) {
      CHECK_FALSE(ok);
      continue;
    }
    REQUIRE(ok);
    CHECK(px.x() == doctest::Approx(K.fx * opt.x() / opt.z() + K.cx).epsilon(1e-10));
    CHECK(px.y() == doctest::Approx(K.fy * opt.y() / opt.z() + K.cy).epsilon(1e-10));
  }
}

TEST_CASE("camera_world_pose composes mount and vehicle planar pose") {
  Pose2 vehicle;
  vehicle.x = 12.0;
  vehicle.y = -3.0;
  vehicle.psi = 0.6;
  CameraPose mount;
  mount.position = {1.77, 0.5, 1.47};
  mount.yaw = 0.1;
  mount.pitch_down = 0.05;
  const CameraPose world = camera_world_pose(vehicle, mount);
  // The mount offset rotates with the vehicle heading.
  const Eigen::Vector2d want =
      vehicle.to_world(Eigen::Vector2d(mount.position.x(), mount.position.y()));
  CHECK(world.position.x() == doctest::Approx(want.x()).epsilon(1e-12));
  CHECK(world.position.y() == doctest::Approx(want.y()).epsilon(1e-12));
  CHECK(world.position.z() == 1.47);
  CHECK(world.yaw == doctest::Approx(0.7));
  CHECK(world.pitch_down == 0.05);
  CHECK(world.roll == 0.0);
}

TEST_CASE("lens distortion monotonicity check") {
  LensModel ok;
  ok.k1 = -0.1;
  CHECK(ok.monotonic_up_to(0.8));
  LensModel bad;
  bad.k1 = -1.2;  // folds back well inside r < 1
  CHECK_FALSE(bad.monotonic_up_to(0.8));
  CHECK(LensModel{}.distort_radius(0.5) == 0.5);
  LensModel m;
  m.k1 = 0.2;
  m.k2 = -0.05;
  m.k3 = 0.01;
  const double r = 0.6;
  const double r2 = r * r;
  CHECK(m.distort_radius(r) ==
        doctest::Approx(r * (1 + 0.2 * r2 - 0.05 * r2 * r2 + 0.01 * r2 * r2 * r2)));
}

}  // TEST_SUITE
