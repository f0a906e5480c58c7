#include "lanesim/world.hpp"

#include <algorithm>
#include <cmath>

namespace lanesim {

namespace {

Eigen::Vector2d dir_of(double heading) { return {std::cos(heading), std::sin(heading)}; }

struct SegmentWalker {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  double heading = 0;
  std::vector<Eigen::Vector2d> pts;

  void emit(const Eigen::Vector2d& p) { pts.push_back(p); }

  // Each segment is sampled at n = round(len/step) uniform subdivisions of
  // its exact geometry, so there are no degenerate tail segments.
  void straight(double length, double step) {
    const Eigen::Vector2d d = dir_of(heading);
    const int n = std::max(1, static_cast<int>(std::llround(length / step)));
    for (int k = 1; k <= n; ++k) emit(pos + d * (length * k / n));
    pos += d * length;
  }

  void arc(double radius, double angle, double step) {
    // Exact circle sampling; positive angle turns left, center on the left.
    const double sgn = (angle >= 0) ? 1.0 : -1.0;
    const Eigen::Vector2d left(-std::sin(heading), std::cos(heading));
    const Eigen::Vector2d center = pos + sgn * radius * left;
    const double arc_len = radius * std::fabs(angle);
    const int n = std::max(1, static_cast<int>(std::llround(arc_len / step)));
    const double start_bearing = std::atan2(pos.y() - center.y(), pos.x() - center.x());
    for (int k = 1; k <= n; ++k) {
      const double b = start_bearing + sgn * std::fabs(angle) * k / n;
      emit(center + radius * Eigen::Vector2d(std::cos(b), std::sin(b)));
    }
    pos = pts.back();
    heading = wrap_angle(heading + angle);
  }
};

}  // namespace

WorldScene build_road(const RoadSpec& spec, uint64_t seed) {
  if (spec.segments.empty()) throw ConfigError("build_road: no segments");
  if (spec.lane_width_m <= 0.5) throw ConfigError("build_road: lane width too small");
  if (spec.sample_step_m <= 0) throw ConfigError("build_road: sample step must be positive");

  WorldScene scene;
  scene.spec = spec;
  scene.seed = seed;

  SegmentWalker w;
  w.emit(w.pos);
  std::vector<ForkFeature> forks;
  double s_consumed = 0;
  for (const auto& seg : spec.segments) {
    if (std::holds_alternative<StraightSegment>(seg)) {
      const auto& st = std::get<StraightSegment>(seg);
      if (st.length_m <= 0) throw ConfigError("build_road: straight length must be positive");
      w.straight(st.length_m, spec.sample_step_m);
      s_consumed += st.length_m;
    } else if (std::holds_alternative<ArcSegment>(seg)) {
      const auto& a = std::get<ArcSegment>(seg);
      if (a.radius_m <= 10.0) throw ConfigError("build_road: arc radius must exceed 10 m");
      if (a.angle_rad == 0) throw ConfigError("build_road: arc angle must be nonzero");
      w.arc(a.radius_m, a.angle_rad, spec.sample_step_m);
      s_consumed += a.radius_m * std::fabs(a.angle_rad);
    } else {
      const auto& f = std::get<ForkSegment>(seg);
      if (f.length_m <= 0) throw ConfigError("build_road: fork length must be positive");
      if (f.side != 1 && f.side != -1) throw ConfigError("build_road: fork side must be +1/-1");
      ForkFeature feat;
      feat.s_start = s_consumed;
      feat.length_m = f.length_m;
      feat.side = f.side;
      feat.end_offset_m = f.end_offset_m;
      forks.push_back(feat);
      w.straight(f.length_m, spec.sample_step_m);
      s_consumed += f.length_m;
    }
  }

  scene.centerline = ArcPolyline(std::move(w.pts));
  scene.left_boundary = scene.centerline.offset(spec.lane_width_m / 2.0);
  scene.right_boundary = scene.centerline.offset(-spec.lane_width_m / 2.0);
  scene.forks = std::move(forks);

  const auto& bb = spec.billboards;
  if (bb.spacing_m > 0) {
    const double len = scene.centerline.length();
    for (uint64_t k = 1;; ++k) {
      Rng rng(mix_seed(seed, 0xb111b0a2dull, k));
      const double s = k * bb.spacing_m + rng.uniform(-0.25, 0.25) * bb.spacing_m;
      if (s > len - 10.0) break;
      if (s < 10.0) continue;
      Billboard b;
      const int side = (k % 2 == 0) ? +1 : -1;
      const double lateral =
          side * (spec.lane_width_m / 2.0 + bb.lateral_offset_m + rng.uniform(0.0, 1.5));
      const Eigen::Vector2d c = scene.centerline.point_at(s);
      const Eigen::Vector2d t = scene.centerline.tangent_at(s);
      const Eigen::Vector2d n(-t.y(), t.x());
      const Eigen::Vector2d p = c + lateral * n;
      b.base = Eigen::Vector3d(p.x(), p.y(), 0.0);
      b.width_m = rng.uniform(bb.width_min_m, bb.width_max_m);
      b.height_m = rng.uniform(bb.height_min_m, bb.height_max_m);
      b.face_normal = t;
      const bool dark = rng.uniform01() < 0.5;
      const float base = dark ? 0.13f : 0.84f;
      b.albedo[0] = base + static_cast<float>(rng.uniform(-0.04, 0.04));
      b.albedo[1] = base + static_cast<float>(rng.uniform(-0.04, 0.04));
      b.albedo[2] = base + static_cast<float>(rng.uniform(-0.04, 0.04));
      scene.billboards.push_back(b);
    }
  }
  return scene;
}

EgoTrace simulate_human_drive(const WorldScene& scene, double speed_mps,
                              double lateral_noise_sd_m, uint64_t seed,
                              const DriveOptions& opt) {
  if (speed_mps <= 0) throw ConfigError("simulate_human_drive: speed must be positive");
  if (opt.dt_s <= 0) throw ConfigError("simulate_human_drive: dt must be positive");
  if (lateral_noise_sd_m < 0) throw ConfigError("simulate_human_drive: negative noise SD");

  const double s_end = scene.centerline.length() - opt.end_margin_m;
  if (s_end <= opt.start_s)
    throw ConfigError("simulate_human_drive: road too short for the requested drive");

  const double ds = speed_mps * opt.dt_s;
  const size_t n = static_cast<size_t>(std::floor((s_end - opt.start_s) / ds)) + 1;

  // Ornstein-Uhlenbeck lateral deviation, correlation length 50 m of arc.
  constexpr double kCorrLen = 50.0;
  const double alpha = std::exp(-ds / kCorrLen);
  const double q = lateral_noise_sd_m * std::sqrt(1.0 - alpha * alpha);
  Rng rng(mix_seed(seed, 0xd21fe5ull));

  std::vector<Eigen::Vector2d> positions(n);
  double e = lateral_noise_sd_m * rng.normal();
  for (size_t k = 0; k < n; ++k) {
    const double s = opt.start_s + k * ds;
    const Eigen::Vector2d c = scene.centerline.point_at(s);
    const Eigen::Vector2d t = scene.centerline.tangent_at(s);
    const Eigen::Vector2d nrm(-t.y(), t.x());
    positions[k] = c + (e + opt.bias_m) * nrm;
    e = alpha * e + q * rng.normal();
  }

  EgoTrace trace;
  trace.dt = opt.dt_s;
  trace.samples.resize(n);
  for (size_t k = 0; k < n; ++k) {
    Eigen::Vector2d d;
    if (k == 0) d = positions[1] - positions[0];
    else if (k + 1 == n) d = positions[k] - positions[k - 1];
    else d = positions[k + 1] - positions[k - 1];
    EgoSample& smp = trace.samples[k];
    smp.t = k * opt.dt_s;
    smp.pose.x = positions[k].x();
    smp.pose.y = positions[k].y();
    smp.pose.psi = std::atan2(d.y(), d.x());
    smp.speed = speed_mps;
  }
  return trace;
}

CameraPose camera_world_pose(const Pose2& vehicle, const CameraPose& mount) {
  CameraPose out;
  const Eigen::Vector2d p =
      vehicle.to_world(Eigen::Vector2d(mount.position.x(), mount.position.y()));
  out.position = Eigen::Vector3d(p.x(), p.y(), mount.position.z());
  out.yaw = vehicle.psi + mount.yaw;
  out.pitch_down = mount.pitch_down;
  out.roll = mount.roll;
  return out;
}

// ---------------------------------------------------------------------------
// Rendering.

namespace {

inline double hash01(uint64_t seed, int64_t ix, int64_t iy) {
  return static_cast<double>(
             mix_seed(seed, static_cast<uint64_t>(ix), static_cast<uint64_t>(iy)) >> 11) *
         0x1.0p-53;
}

// Smooth value noise in [0, 1], features on the unit scale.
double vnoise2(double x, double y, uint64_t seed) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int64_t ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy);
  double ux = x - fx, uy = y - fy;
  ux = ux * ux * (3.0 - 2.0 * ux);
  uy = uy * uy * (3.0 - 2.0 * uy);
  const double v00 = hash01(seed, ix, iy);
  const double v10 = hash01(seed, ix + 1, iy);
  const double v01 = hash01(seed, ix, iy + 1);
  const double v11 = hash01(seed, ix + 1, iy + 1);
  const double a = v00 + (v10 - v00) * ux;
  const double b = v01 + (v11 - v01) * ux;
  return a + (b - a) * uy;
}

// Box-filter coverage of interval [lo, hi] by a window of `band` centered on
// x. This is the analytic anti-aliasing primitive: band is one pixel's
// ground footprint.
inline double cov_interval(double lo, double hi, double x, double band) {
  const double o = std::min(hi, x + band / 2.0) - std::max(lo, x - band / 2.0);
  return std::clamp(o / band, 0.0, 1.0);
}

// Coverage of a periodic dash pattern (on-interval [0, fill*period) in phase)
// by a window of `band` centered on phase u.
double cov_dash(double s, double period, double fill, double band) {
  if (band >= period) return fill;
  const double u = s - std::floor(s / period) * period;
  const double on = fill * period;
  double c = 0;
  for (int k = -1; k <= 1; ++k) {
    const double lo = k * period, hi = k * period + on;
    const double o = std::min(hi, u + band / 2.0) - std::max(lo, u - band / 2.0);
    if (o > 0) c += o;
  }
  return std::clamp(c / band, 0.0, 1.0);
}

struct GroundShader {
  const WorldScene& scene;
  uint64_t seed_coarse, seed_fine;
  mutable size_t hint;

  GroundShader(const WorldScene& sc, size_t initial_hint)
      : scene(sc),
        seed_coarse(mix_seed(sc.seed, 0xc0a25e)),
        seed_fine(mix_seed(sc.seed, 0xf13e)),
        hint(initial_hint) {}

  // g: ground point; t: ray length (m); band_lat/band_long: pixel footprints.
  void shade(const Eigen::Vector2d& g, double t, double fx, double fy, double cam_h,
             float* rgb) const {
    static constexpr double kGrass[3] = {0.40, 0.52, 0.30};
    const double band_lat = std::max(0.02, t / fx);
    const double band_long = std::max(0.02, t * t / (fy * cam_h));

    // Texture detail fades with distance; beyond the fade the ground is the
    // flat grass tone, so two nearby viewpoints shade far points identically.
    const double far_w = std::clamp((t - 1200.0) / 600.0, 0.0, 1.0);
    if (far_w >= 1.0) {
      for (int i = 0; i < 3; ++i) rgb[i] = static_cast<float>(kGrass[i]);
      return;
    }

    const auto proj = scene.centerline.project_hinted(g, &hint);
    const double s = proj.s;
    const double d = proj.signed_offset;
    const double half = scene.spec.lane_width_m / 2.0;
    constexpr double kShoulder = 0.45;

    // Fork widening (rendering only; lane boundaries stay on the main road).
    double ramp = 0.0;
    int ramp_side = 0;
    for (const auto& f : scene.forks) {
      if (s >= f.s_start && s <= f.s_start + f.length_m) {
        ramp = f.end_offset_m * (s - f.s_start) / f.length_m;
        ramp_side = f.side;
      }
    }
    const double edge_left = half + kShoulder + (ramp_side > 0 ? ramp : 0.0);
    const double edge_right = half + kShoulder + (ramp_side < 0 ? ramp : 0.0);

    const double noise_amp = std::clamp((150.0 - t) / 100.0, 0.0, 1.0);
    double n = 0.0;
    if (noise_amp > 0) {
      const double n1 = vnoise2(g.x() / 2.7, g.y() / 2.7, seed_coarse) - 0.5;
      const double n2 = vnoise2(g.x() / 0.9, g.y() / 0.9, seed_fine) - 0.5;
      n = noise_amp * (0.65 * n1 + 0.35 * n2);
    }

    const double cov_asphalt = cov_interval(-edge_right, edge_left, d, band_lat);

    const double lw = scene.spec.line_width_m;
    // Right line solid, left line dashed.
    double marks = cov_interval(-half - lw / 2, -half + lw / 2, d, band_lat);
    marks += cov_interval(half - lw / 2, half + lw / 2, d, band_lat) *
             cov_dash(s, scene.spec.dash_period_m, scene.spec.dash_fill, band_long);
    if (ramp_side != 0 && ramp > 0) {
      const double line_d = ramp_side * (half + ramp);
      marks += cov_interval(line_d - lw / 2, line_d + lw / 2, d, band_lat);
    }
    marks = std::min(1.0, marks);

    const double grass[3] = {kGrass[0] + 0.14 * n, kGrass[1] + 0.16 * n, kGrass[2] + 0.11 * n};
    const double asphalt[3] = {0.33 + 0.09 * n, 0.33 + 0.09 * n, 0.345 + 0.09 * n};
    const double marking[3] = {0.92 + 0.05 * n, 0.92 + 0.05 * n, 0.87 + 0.05 * n};
    for (int i = 0; i < 3; ++i) {
      double c = grass[i] + (asphalt[i] - grass[i]) * cov_asphalt;
      c += (marking[i] - c) * marks;
      c += (kGrass[i] - c) * far_w;
      rgb[i] = static_cast<float>(c);
    }
  }
};

struct VisibleBillboard {
  const Billboard* b;
  uint32_t index;
  Eigen::Vector2d edge;  // horizontal unit along the face
  int u_min, u_max;      // column bbox in the image (inclusive)
  int v_min, v_max;
};

std::vector<VisibleBillboard> cull_billboards(const WorldScene& scene,
                                              const CameraPose& cam,
                                              const CameraIntrinsics& K) {
  std::vector<VisibleBillboard> out;
  const Eigen::Vector2d cpos(cam.position.x(), cam.position.y());
  const Eigen::Vector2d fwd(std::cos(cam.yaw), std::sin(cam.yaw));
  for (uint32_t i = 0; i < scene.billboards.size(); ++i) {
    const Billboard& b = scene.billboards[i];
    const Eigen::Vector2d rel(b.base.x() - cpos.x(), b.base.y() - cpos.y());
    const double ahead = rel.dot(fwd);
    const double lat = -fwd.y() * rel.x() + fwd.x() * rel.y();
    if (ahead < -10.0 || ahead > 400.0 || std::fabs(lat) > 80.0) continue;

    VisibleBillboard vb;
    vb.b = &b;
    vb.index = i;
    vb.edge = Eigen::Vector2d(-b.face_normal.y(), b.face_normal.x());

    // Image bbox from the four corners; behind-camera corners widen the bbox
    // to the full raster conservatively.
    double u0 = 1e9, u1 = -1e9, v0 = 1e9, v1 = -1e9;
    bool any_behind = false;
    for (int cx = -1; cx <= 1; cx += 2)
      for (int cz = 0; cz <= 1; ++cz) {
        const Eigen::Vector3d corner =
            b.base + Eigen::Vector3d(vb.edge.x(), vb.edge.y(), 0.0) * (cx * b.width_m / 2.0) +
            Eigen::Vector3d(0, 0, cz * b.height_m);
        Eigen::Vector2d px;
        if (!project_point(cam, K, corner, &px, 0.2)) {
          any_behind = true;
          continue;
        }
        u0 = std::min(u0, px.x());
        u1 = std::max(u1, px.x());
        v0 = std::min(v0, px.y());
        v1 = std::max(v1, px.y());
      }
    if (any_behind) {
      u0 = 0;
      u1 = K.width - 1;
      v0 = 0;
      v1 = K.height - 1;
    } else if (u1 < -2 || u0 > K.width + 1 || v1 < -2 || v0 > K.height + 1) {
      continue;
    }
    vb.u_min = std::max(0, static_cast<int>(std::floor(u0)) - 2);
    vb.u_max = std::min(K.width - 1, static_cast<int>(std::ceil(u1)) + 2);
    vb.v_min = std::max(0, static_cast<int>(std::floor(v0)) - 2);
    vb.v_max = std::min(K.height - 1, static_cast<int>(std::ceil(v1)) + 2);
    if (vb.u_min > vb.u_max || vb.v_min > vb.v_max) continue;
    out.push_back(vb);
  }
  return out;
}

// Coverage and color of the nearest billboard along the ray, or coverage 0.
double billboard_hit(const std::vector<const VisibleBillboard*>& boards,
                     const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                     double t_max, double fx, uint64_t scene_seed, int v, int /*u*/,
                     float* rgb_out) {
  double best_t = 1e30;
  double best_cov = 0;
  const VisibleBillboard* best = nullptr;
  double best_local_u = 0, best_local_v = 0;
  for (const VisibleBillboard* vb : boards) {
    if (v < vb->v_min || v > vb->v_max) continue;
    const Billboard& b = *vb->b;
    const Eigen::Vector3d n3(b.face_normal.x(), b.face_normal.y(), 0.0);
    const double denom = n3.dot(dir);
    if (std::fabs(denom) < 1e-9) continue;
    const double t = n3.dot(b.base - origin) / denom;
    if (t < 0.2 || t >= std::min(best_t, t_max)) continue;
    const Eigen::Vector3d p = origin + t * dir;
    const double lu = (p.x() - b.base.x()) * vb->edge.x() + (p.y() - b.base.y()) * vb->edge.y();
    const double lv = p.z();
    const double band = std::max(0.01, t / fx);
    const double cov = cov_interval(-b.width_m / 2.0, b.width_m / 2.0, lu, band) *
                       cov_interval(0.0, b.height_m, lv, band);
    if (cov > 1e-3) {
      best_t = t;
      best_cov = cov;
      best = vb;
      best_local_u = lu;
      best_local_v = lv;
    }
  }
  if (!best) return 0.0;
  const Billboard& b = *best->b;
  const double n =
      vnoise2(best_local_u * 2.0, best_local_v * 2.0, mix_seed(scene_seed, 0xb0a4d, best->index)) -
      0.5;
  for (int i = 0; i < 3; ++i)
    rgb_out[i] = static_cast<float>(std::clamp(b.albedo[i] + 0.08 * n, 0.0, 1.0));
  return best_cov;
}

ImageBuffer render_common(const WorldScene& scene, const CameraPose& cam,
                          const CameraIntrinsics& K, bool mask_only) {
  if (cam.position.z() <= 0)
    throw RuntimeError("render_frame: camera must be above the ground");
  ImageBuffer out(K.width, K.height, mask_only ? 1 : 3);

  const Eigen::Matrix3d R = camera_rotation(cam);
  const Eigen::Matrix3d Kinv = intrinsic_matrix(K).inverse();
  const Eigen::Matrix3d ray_mat = R * Kinv;
  const Eigen::Vector3d origin = cam.position;

  const auto visible = cull_billboards(scene, cam, K);
  // Per-column lists keep the per-pixel billboard loop short.
  std::vector<std::vector<const VisibleBillboard*>> by_col(static_cast<size_t>(K.width));
  for (const auto& vb : visible)
    for (int u = vb.u_min; u <= vb.u_max; ++u) by_col[static_cast<size_t>(u)].push_back(&vb);

  size_t start_hint = 0;
  {
    const Eigen::Vector2d cpos(origin.x(), origin.y());
    const auto proj = scene.centerline.project(cpos);
    start_hint = scene.centerline.stations().empty()
                     ? 0
                     : std::min(static_cast<size_t>(
                                    std::lower_bound(scene.centerline.stations().begin(),
                                                     scene.centerline.stations().end(), proj.s) -
                                    scene.centerline.stations().begin()),
                                scene.centerline.size() - 2);
  }
  GroundShader shader(scene, start_hint);

  // bb_rgb must start finite: billboard_hit leaves it untouched on a miss and
  // the blend below multiplies it by a zero coverage, which keeps NaN alive.
  float rgb[3] = {0, 0, 0}, bb_rgb[3] = {0, 0, 0};
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      const Eigen::Vector3d dir = ray_mat * Eigen::Vector3d(u, v, 1.0);
      double t_ground = 1e30;
      if (dir.z() < -1e-9) {
        t_ground = -origin.z() / dir.z();
        if (!mask_only) {
          const Eigen::Vector2d g(origin.x() + t_ground * dir.x(),
                                  origin.y() + t_ground * dir.y());
          shader.shade(g, t_ground, K.fx, K.fy, origin.z(), rgb);
        }
      } else if (!mask_only) {
        rgb[0] = rgb[1] = rgb[2] = 0.5f;  // sky
      }
      const double cov = billboard_hit(by_col[static_cast<size_t>(u)], origin, dir,
                                       t_ground, K.fx, scene.seed, v, u, bb_rgb);
      if (mask_only) {
        out.at(v, u, 0) = static_cast<float>(cov);
      } else {
        for (int ch = 0; ch < 3; ++ch)
          out.at(v, u, ch) = rgb[ch] + (bb_rgb[ch] - rgb[ch]) * static_cast<float>(cov);
      }
    }
  }
  return out;
}

}  // namespace

ImageBuffer render_frame(const WorldScene& scene, const CameraPose& camera,
                         const CameraIntrinsics& K) {
  return render_common(scene, camera, K, false);
}

ImageBuffer render_billboard_mask(const WorldScene& scene, const CameraPose& camera,
                                  const CameraIntrinsics& K) {
  return render_common(scene, camera, K, true);
}

}  // namespace lanesim
