#include "lanesim/resim.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lanesim {

const char* failure_cause_name(FailureCause cause) {
  return cause == FailureCause::boundary_touch ? "boundary_touch" : "warp_invalid";
}

size_t ResimReport::failure_count(FailureCause cause) const {
  size_t n = 0;
  for (const auto& f : failures) n += f.cause == cause;
  return n;
}

SimState step_vehicle(const SimState& state, double steering_rad, const VehicleSpec& vehicle,
                      double dt_s) {
  if (vehicle.wheelbase_m <= 0) throw ConfigError("step_vehicle: wheelbase must be positive");
  SimState next = state;
  next.steering = steering_rad;
  const double ds = state.speed * dt_s;
  const double tan_d = std::tan(steering_rad);
  if (std::abs(tan_d) < 1e-12) {
    next.pose.x += ds * std::cos(state.pose.psi);
    next.pose.y += ds * std::sin(state.pose.psi);
  } else {
    // Exact arc: radius wheelbase/tan(steering), signed (left positive).
    const double radius = vehicle.wheelbase_m / tan_d;
    const double dpsi = ds / radius;
    next.pose.x += radius * (std::sin(state.pose.psi + dpsi) - std::sin(state.pose.psi));
    next.pose.y += radius * (std::cos(state.pose.psi) - std::cos(state.pose.psi + dpsi));
    next.pose.psi = wrap_angle(state.pose.psi + dpsi);
  }
  next.distance_m += std::abs(ds);
  return next;
}

double pure_pursuit(const TrajectoryPrediction& prediction, const VehicleSpec& vehicle,
                    double lookahead_m) {
  if (prediction.size() < 2) throw RuntimeError("pure_pursuit: prediction too short");
  if (lookahead_m > static_cast<double>(prediction.size()))
    throw RuntimeError("pure_pursuit: lookahead beyond the prediction range");
  if (lookahead_m <= 0) throw ConfigError("pure_pursuit: lookahead must be positive");
  // Stations are 1..N; the trajectory starts at the vehicle, so below the
  // first station interpolate from (0, 0).
  double y_l;
  if (lookahead_m < 1.0) {
    y_l = lookahead_m * prediction[0];
  } else {
    const size_t i0 = std::min(static_cast<size_t>(lookahead_m), prediction.size() - 1);
    const double frac = lookahead_m - static_cast<double>(i0);
    y_l = prediction[i0 - 1] + frac * (prediction[i0] - prediction[i0 - 1]);
  }
  return std::atan(2.0 * vehicle.wheelbase_m * y_l / (lookahead_m * lookahead_m));
}

std::optional<FailureCause> detect_failure(const Pose2& pose, const VehicleSpec& vehicle,
                                           const ArcPolyline& left_boundary,
                                           const ArcPolyline& right_boundary) {
  const double half_track = vehicle.track_m / 2.0;
  const Eigen::Vector2d wheels[4] = {
      pose.to_world({0.0, half_track}),
      pose.to_world({0.0, -half_track}),
      pose.to_world({vehicle.wheelbase_m, half_track}),
      pose.to_world({vehicle.wheelbase_m, -half_track}),
  };
  for (const auto& w : wheels) {
    if (left_boundary.project(w).signed_offset > 0.0) return FailureCause::boundary_touch;
    if (right_boundary.project(w).signed_offset < 0.0) return FailureCause::boundary_touch;
  }
  return std::nullopt;
}

size_t nearest_frame(const Recording& rec, double station) {
  const auto& ts = rec.tick_stations();
  if (ts.empty()) throw RuntimeError("nearest_frame: empty recording");
  const auto it = std::lower_bound(ts.begin(), ts.end(), station);
  if (it == ts.begin()) return 0;
  if (it == ts.end()) return ts.size() - 1;
  const size_t hi = static_cast<size_t>(it - ts.begin());
  const size_t lo = hi - 1;
  // Ties go to the lower index.
  return (station - ts[lo] <= ts[hi] - station) ? lo : hi;
}

WarpResult synthesize_view(const Recording& rec, size_t tick, const Pose2& sim_pose) {
  const CameraRig& rig = rec.rig();
  const size_t cam = rig.index_of("center");
  const CameraPose src = camera_world_pose(rec.ticks().at(tick).pose, rig.cameras[cam].mount);
  const CameraPose dst = camera_world_pose(sim_pose, standard_camera_mount());
  return warp_viewpoint(rec.frame(tick, cam), src, dst, rig.intrinsics);
}

namespace {

void validate_resim_config(const Recording& rec, const VehicleSpec& vehicle,
                           const ResimConfig& cfg) {
  if (vehicle.wheelbase_m <= 0 || vehicle.track_m <= 0)
    throw ConfigError("resim: vehicle dimensions must be positive");
  if (!(cfg.dt_s > 0 && cfg.dt_s <= 0.2)) throw ConfigError("resim: dt must be in (0, 0.2]");
  if (cfg.max_warp_offset_m <= 0 || cfg.max_warp_yaw_rad <= 0)
    throw ConfigError("resim: warp validity bounds must be positive");
  if (cfg.min_lookahead_m < 1.0) throw ConfigError("resim: min lookahead must be >= 1 m");
  if (!(cfg.max_steering_rad > 0 && cfg.max_steering_rad < kPi / 2))
    throw ConfigError("resim: max steering must be in (0, pi/2)");

  double max_speed = 0;
  for (const auto& t : rec.ticks()) max_speed = std::max(max_speed, t.speed);
  const double max_lookahead = std::max(cfg.min_lookahead_m, cfg.lookahead_time_s * max_speed);
  if (!(cfg.cooldown_m > max_lookahead))
    throw ConfigError("resim: cooldown must exceed the controller lookahead");

  const Eigen::Vector2d c0 = rec.centerline().point_at(rec.tick_stations().front());
  const double lane_width = std::abs(rec.left_boundary().project(c0).signed_offset) +
                            std::abs(rec.right_boundary().project(c0).signed_offset);
  if (!(vehicle.track_m < lane_width))
    throw ConfigError("resim: vehicle track must be narrower than the lane");
}

}  // namespace

ResimReport run_resim(const Recording& rec, const Policy& policy, const PatchSpec& patch_spec,
                      const VehicleSpec& vehicle, const ResimConfig& cfg) {
  validate_resim_config(rec, vehicle, cfg);
  const ArcPolyline& center = rec.centerline();
  const auto& ticks = rec.ticks();
  const auto& stations = rec.tick_stations();

  const double s_start = stations.front();
  const double s_end = std::min(center.length() - (kLabelPointCount + 1.0), stations.back() - 1.0);
  if (!(s_end > s_start)) throw ConfigError("resim: recording too short to drive");

  ResimReport report;
  report.recording_id = rec.id();
  report.policy_name = policy.name();
  report.config_hash = cfg.config_hash;
  report.dt_s = cfg.dt_s;

  SimState state;
  state.pose = Pose2{center.point_at(s_start).x(), center.point_at(s_start).y(),
                     center.heading_at(s_start)};
  state.speed = ticks.front().speed;

  double cooldown_until = -std::numeric_limits<double>::infinity();
  int consecutive_resets = 0;

  const auto reset_to_center = [&](double s) {
    const Eigen::Vector2d p = center.point_at(s);
    state.pose = Pose2{p.x(), p.y(), center.heading_at(s)};
    state.steering = 0;
    if (++consecutive_resets > 8)
      throw RuntimeError("resim: stuck in resets; the recording is outside warp validity at "
                         "the lane center, raise max_warp_offset_m");
    return std::abs(center.project(state.pose.position()).signed_offset);
  };

  for (uint64_t iter = 0;; ++iter) {
    if (iter >= cfg.max_steps) throw RuntimeError("resim: step budget exhausted");
    const ArcPolyline::Projection proj = center.project(state.pose.position());
    if (proj.s >= s_end) break;
    const bool in_cooldown = proj.s < cooldown_until;

    const size_t tick = nearest_frame(rec, proj.s);
    const Pose2& tick_pose = ticks[tick].pose;
    state.speed = ticks[tick].speed;

    // Sensor synthesis is valid only near the recorded frame: bounded lateral
    // offset in the recorded frame's axes and bounded heading difference.
    const double lat = tick_pose.to_local(state.pose.position()).y();
    const double yaw_err = wrap_angle(state.pose.psi - tick_pose.psi);
    if (std::abs(lat) > cfg.max_warp_offset_m || std::abs(yaw_err) > cfg.max_warp_yaw_rad) {
      if (in_cooldown) {
        reset_to_center(proj.s);
      } else {
        FailureEvent ev;
        ev.distance_m = state.distance_m;
        ev.station_s = proj.s;
        ev.cause = FailureCause::warp_invalid;
        ev.post_reset_offset_m = reset_to_center(proj.s);
        report.failures.push_back(ev);
        cooldown_until = proj.s + cfg.cooldown_m;
      }
      continue;
    }

    ImageBuffer patch;
    PolicyInput input;
    PrivilegedView priv;
    priv.pose = state.pose;
    priv.centerline = &center;
    priv.human_path = &rec.human_path();
    input.privileged = &priv;
    if (policy.needs_patch()) {
      const WarpResult view = synthesize_view(rec, tick, state.pose);
      patch = build_patch(view.image, rec.rig().intrinsics, standard_camera_mount(), patch_spec);
      input.patch = &patch;
    }
    const TrajectoryPrediction pred = policy.run(input);

    const double lookahead =
        std::max(cfg.min_lookahead_m, cfg.lookahead_time_s * state.speed);
    const double steer = std::clamp(pure_pursuit(pred, vehicle, lookahead),
                                    -cfg.max_steering_rad, cfg.max_steering_rad);

    ResimStep step;
    step.t = static_cast<double>(report.steps.size()) * cfg.dt_s;
    step.station_s = proj.s;
    step.speed = state.speed;
    step.lateral_offset = proj.signed_offset;
    step.lateral_accel = state.speed * state.speed * std::tan(steer) / vehicle.wheelbase_m;
    step.steering = steer;
    step.pred_y10 = pred[9];
    step.pred_y50 = pred[49];
    step.in_cooldown = in_cooldown;
    report.steps.push_back(step);
    report.predictions.push_back(pred);
    consecutive_resets = 0;

    state = step_vehicle(state, steer, vehicle, cfg.dt_s);

    if (const auto cause = detect_failure(state.pose, vehicle, rec.left_boundary(),
                                          rec.right_boundary())) {
      const double s_now = center.project(state.pose.position()).s;
      if (s_now < cooldown_until) {
        reset_to_center(s_now);
      } else {
        FailureEvent ev;
        ev.distance_m = state.distance_m;
        ev.station_s = s_now;
        ev.cause = *cause;
        ev.post_reset_offset_m = reset_to_center(s_now);
        report.failures.push_back(ev);
        cooldown_until = s_now + cfg.cooldown_m;
      }
    }
  }

  report.distance_m = state.distance_m;
  return report;
}

void save_report(const ResimReport& report, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeError("save_report: cannot open " + path.string());
  os << "lanesim_resim_report v1\n";
  os << "recording " << report.recording_id << "\n";
  os << "policy " << report.policy_name << "\n";
  os << "config_hash " << to_hex16(report.config_hash) << "\n";
  os << "dt " << format_double(report.dt_s) << "\n";
  os << "distance_m " << format_double(report.distance_m) << "\n";
  os << "failures " << report.failures.size() << "\n";
  for (const auto& f : report.failures)
    os << "failure " << format_double(f.distance_m) << " " << format_double(f.station_s) << " "
       << failure_cause_name(f.cause) << " " << format_double(f.post_reset_offset_m) << "\n";
  os << "steps " << report.steps.size() << "\n";
  for (const auto& st : report.steps)
    os << "step " << format_double(st.t) << " " << format_double(st.station_s) << " "
       << format_double(st.speed) << " " << format_double(st.lateral_offset) << " "
       << format_double(st.lateral_accel) << " " << format_double(st.steering) << " "
       << format_double(st.pred_y10) << " " << format_double(st.pred_y50) << " "
       << (st.in_cooldown ? 1 : 0) << "\n";
  os << "end\n";
  os.close();
  if (!os) throw RuntimeError("save_report: write failed for " + path.string());
}

namespace {

std::string expect_key(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw RuntimeError("load_report: truncated at '" + key + "'");
  if (line.rfind(key + " ", 0) != 0 && line != key)
    throw RuntimeError("load_report: expected '" + key + "', got '" + line + "'");
  return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
}

}  // namespace

ResimReport load_report(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw RuntimeError("load_report: cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "lanesim_resim_report v1")
    throw RuntimeError("load_report: bad header in " + path.string());
  ResimReport r;
  r.recording_id = expect_key(is, "recording");
  r.policy_name = expect_key(is, "policy");
  r.config_hash = std::stoull(expect_key(is, "config_hash"), nullptr, 16);
  r.dt_s = std::stod(expect_key(is, "dt"));
  r.distance_m = std::stod(expect_key(is, "distance_m"));
  const size_t n_failures = std::stoull(expect_key(is, "failures"));
  for (size_t i = 0; i < n_failures; ++i) {
    std::istringstream ls(expect_key(is, "failure"));
    FailureEvent f;
    std::string cause;
    ls >> f.distance_m >> f.station_s >> cause >> f.post_reset_offset_m;
    if (!ls) throw RuntimeError("load_report: malformed failure line");
    if (cause == "boundary_touch")
      f.cause = FailureCause::boundary_touch;
    else if (cause == "warp_invalid")
      f.cause = FailureCause::warp_invalid;
    else
      throw RuntimeError("load_report: unknown failure cause '" + cause + "'");
    r.failures.push_back(f);
  }
  const size_t n_steps = std::stoull(expect_key(is, "steps"));
  for (size_t i = 0; i < n_steps; ++i) {
    std::istringstream ls(expect_key(is, "step"));
    ResimStep s;
    int cd = 0;
    ls >> s.t >> s.station_s >> s.speed >> s.lateral_offset >> s.lateral_accel >> s.steering >>
        s.pred_y10 >> s.pred_y50 >> cd;
    if (!ls) throw RuntimeError("load_report: malformed step line");
    s.in_cooldown = cd != 0;
    r.steps.push_back(s);
  }
  expect_key(is, "end");
  return r;
}

}  // namespace lanesim
