#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "lanesim/camera.hpp"
#include "lanesim/image.hpp"
#include "lanesim/polyline.hpp"

namespace lanesim {

struct StraightSegment {
  double length_m = 0;
};
struct ArcSegment {
  double radius_m = 0;   // > 10
  double angle_rad = 0;  // signed, positive = left turn
};
// Exit-style fork: the main road runs straight while a ramp boundary line
// diverges to end_offset_m on the given side, with the asphalt widened up to
// that line. Ground truth (centerline, lane boundaries) stays on the main
// road; only the rendering changes.
struct ForkSegment {
  double length_m = 0;
  int side = +1;  // +1 left, -1 right
  double end_offset_m = 0;
};
using RoadSegment = std::variant<StraightSegment, ArcSegment, ForkSegment>;

struct BillboardLayout {
  double spacing_m = 0;  // 0 disables billboards
  double lateral_offset_m = 5.5;  // beyond the lane edge
  double width_min_m = 0.3, width_max_m = 1.2;
  double height_min_m = 2.5, height_max_m = 4.5;
};

struct RoadSpec {
  std::vector<RoadSegment> segments;
  double lane_width_m = 3.7;
  double line_width_m = 0.15;
  double dash_period_m = 9.0;  // left line dash cycle; right line is solid
  double dash_fill = 1.0 / 3.0;
  double sample_step_m = 0.25;
  BillboardLayout billboards;
};

// Vertical rectangle standing on the ground, facing along the road.
struct Billboard {
  Eigen::Vector3d base = Eigen::Vector3d::Zero();  // bottom-center, z = 0
  double width_m = 0, height_m = 0;
  Eigen::Vector2d face_normal = Eigen::Vector2d::UnitX();  // horizontal unit
  float albedo[3] = {0, 0, 0};
};

struct ForkFeature {
  double s_start = 0, length_m = 0;
  int side = +1;
  double end_offset_m = 0;
};

struct WorldScene {
  RoadSpec spec;
  ArcPolyline centerline;
  ArcPolyline left_boundary;   // centerline offset +lane_width/2
  ArcPolyline right_boundary;  // centerline offset -lane_width/2
  std::vector<Billboard> billboards;
  std::vector<ForkFeature> forks;
  uint64_t seed = 0;
};

// Deterministic world construction: chained segments with continuous heading,
// centerline sampled on the exact segment geometry, boundaries as exact
// lateral offsets, billboards and texture seeds derived from `seed`.
WorldScene build_road(const RoadSpec& spec, uint64_t seed);

struct EgoSample {
  double t = 0;
  Pose2 pose;
  double speed = 0;
};
struct EgoTrace {
  std::vector<EgoSample> samples;
  double dt = 0;
};

struct DriveOptions {
  double dt_s = 0.05;
  double bias_m = 0;         // constant lateral offset (left positive)
  double start_s = 0;
  double end_margin_m = 115; // keep room for 100 m labels past the last pose
};

// Constant-speed drive along the centerline with an Ornstein-Uhlenbeck
// lateral deviation (stationary SD = lateral_noise_sd_m, correlation length
// 50 m of arc) plus the optional constant bias. Heading follows the
// perturbed path (central differences).
EgoTrace simulate_human_drive(const WorldScene& scene, double speed_mps,
                              double lateral_noise_sd_m, uint64_t seed,
                              const DriveOptions& opt = {});

// Pinhole render of the scene from a world-frame camera pose: flat textured
// ground (asphalt, grass, lane markings, fork ramp), billboards, constant-0.5
// sky. Edges are analytically anti-aliased over roughly one pixel's ground
// footprint, so images are smooth enough for sub-pixel warp comparisons.
ImageBuffer render_frame(const WorldScene& scene, const CameraPose& camera,
                         const CameraIntrinsics& K);

// Coverage (0..1) of raised objects per pixel from the same camera; used to
// separate ground-plane-exact regions from parallax regions in tests.
ImageBuffer render_billboard_mask(const WorldScene& scene, const CameraPose& camera,
                                  const CameraIntrinsics& K);

// World-frame camera pose of a vehicle-frame mount at a planar vehicle pose.
CameraPose camera_world_pose(const Pose2& vehicle, const CameraPose& mount);

}  // namespace lanesim
