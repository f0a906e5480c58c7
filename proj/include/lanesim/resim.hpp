#pragma once

#include <filesystem>
#include <optional>

#include "lanesim/policy.hpp"
#include "lanesim/recording.hpp"

namespace lanesim {

struct VehicleSpec {
  double wheelbase_m = 2.85;  // rear axle at the origin, front axle at +x
  double track_m = 1.6;
};

struct SimState {
  Pose2 pose;
  double speed = 0;
  double steering = 0;  // executed steering, rad, left positive
  double distance_m = 0;
};

struct ResimConfig {
  double dt_s = 0.05;
  // Beyond either bound relative to the nearest recorded frame, sensor
  // synthesis is declared invalid.
  double max_warp_offset_m = 1.5;  // lateral, in the recorded frame's axes
  double max_warp_yaw_rad = deg2rad(10.0);
  double cooldown_m = 50.0;  // failure suppression after a reset
  double lookahead_time_s = 1.2;
  double min_lookahead_m = 8.0;
  double max_steering_rad = 0.5;
  uint64_t max_steps = 400000;
  uint64_t config_hash = 0;  // stamped into the report
};

enum class FailureCause : uint8_t { boundary_touch = 0, warp_invalid = 1 };

const char* failure_cause_name(FailureCause cause);

struct FailureEvent {
  double distance_m = 0;  // driven distance at the event
  double station_s = 0;   // centerline station
  FailureCause cause = FailureCause::boundary_touch;
  double post_reset_offset_m = 0;  // |lateral offset| right after the reset
};

struct ResimStep {
  double t = 0;
  double station_s = 0;
  double speed = 0;
  double lateral_offset = 0;  // to the centerline, left positive
  double lateral_accel = 0;   // speed^2 * tan(steering) / wheelbase
  double steering = 0;
  double pred_y10 = 0;  // prediction at the 10 m and 50 m stations
  double pred_y50 = 0;
  bool in_cooldown = false;
};

struct ResimReport {
  std::string recording_id;
  std::string policy_name;
  uint64_t config_hash = 0;
  double dt_s = 0.05;
  double distance_m = 0;
  std::vector<FailureEvent> failures;
  std::vector<ResimStep> steps;
  // Full per-step predictions; kept in memory, summarized in the text form.
  std::vector<TrajectoryPrediction> predictions;

  size_t failure_count(FailureCause cause) const;
};

// Rear-axle kinematic bicycle advanced one step at constant speed along the
// exact circular arc for the commanded steering (clamped by the caller).
SimState step_vehicle(const SimState& state, double steering_rad, const VehicleSpec& vehicle,
                      double dt_s);

// steering = atan(2 * wheelbase * y_L / L^2) with y_L interpolated from the
// prediction at station L. Throws when L exceeds the prediction range.
double pure_pursuit(const TrajectoryPrediction& prediction, const VehicleSpec& vehicle,
                    double lookahead_m);

// A wheel strictly beyond either lane boundary is a failure.
std::optional<FailureCause> detect_failure(const Pose2& pose, const VehicleSpec& vehicle,
                                           const ArcPolyline& left_boundary,
                                           const ArcPolyline& right_boundary);

// Frame whose tick station is nearest to `station`; ties go to the lower
// index.
size_t nearest_frame(const Recording& rec, double station);

// Center-camera view at the simulated pose, warped from the given tick.
WarpResult synthesize_view(const Recording& rec, size_t tick, const Pose2& sim_pose);

ResimReport run_resim(const Recording& rec, const Policy& policy, const PatchSpec& patch_spec,
                      const VehicleSpec& vehicle, const ResimConfig& cfg);

// Deterministic fixed-field-order text; numbers at 12 significant digits.
void save_report(const ResimReport& report, const std::filesystem::path& path);
ResimReport load_report(const std::filesystem::path& path);

}  // namespace lanesim
