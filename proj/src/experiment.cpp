#include "lanesim/experiment.hpp"

#include <fstream>
#include <future>
#include <sstream>

namespace lanesim {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("road: bad number '" + s + "' in " + what);
  }
}

}  // namespace

std::vector<RoadSegment> parse_road(const std::string& dsl) {
  std::vector<RoadSegment> segments;
  std::istringstream is(dsl);
  std::string token;
  while (is >> token) {
    const auto parts = split(token, ':');
    if (parts[0] == "straight") {
      if (parts.size() != 2) throw ConfigError("road: expected straight:<length>, got " + token);
      segments.push_back(StraightSegment{parse_double(parts[1], token)});
    } else if (parts[0] == "arc") {
      if (parts.size() != 3)
        throw ConfigError("road: expected arc:<length>:<angle_rad>, got " + token);
      const double length = parse_double(parts[1], token);
      const double angle = parse_double(parts[2], token);
      if (length <= 0) throw ConfigError("road: arc length must be positive in " + token);
      if (angle == 0) throw ConfigError("road: arc angle must be nonzero in " + token);
      segments.push_back(ArcSegment{length / std::abs(angle), angle});
    } else if (parts[0] == "fork") {
      if (parts.size() != 4)
        throw ConfigError("road: expected fork:<length>:<left|right>:<offset_m>, got " + token);
      ForkSegment f;
      f.length_m = parse_double(parts[1], token);
      if (parts[2] == "left")
        f.side = +1;
      else if (parts[2] == "right")
        f.side = -1;
      else
        throw ConfigError("road: fork side must be left or right in " + token);
      f.end_offset_m = parse_double(parts[3], token);
      segments.push_back(f);
    } else {
      throw ConfigError("road: unknown segment kind '" + parts[0] + "'");
    }
  }
  if (segments.empty()) throw ConfigError("road: no segments");
  return segments;
}

uint64_t world_seed(const Config& cfg) {
  if (cfg.seed_override()) return *cfg.seed_override();
  return cfg.get_u64("world", "seed", 1);
}

RoadSpec road_spec_from_config(const Config& cfg) {
  if (!cfg.has("world", "road"))
    throw ConfigError("config: [world] road is required (segment list)");
  RoadSpec spec;
  spec.segments = parse_road(cfg.get_string("world", "road", ""));
  spec.lane_width_m = cfg.get_double("world", "lane_width_m", 3.7);
  spec.line_width_m = cfg.get_double("world", "line_width_m", 0.15);
  spec.dash_period_m = cfg.get_double("world", "dash_period_m", 9.0);
  spec.dash_fill = cfg.get_double("world", "dash_fill", 1.0 / 3.0);
  spec.sample_step_m = cfg.get_double("world", "sample_step_m", 0.25);
  spec.billboards.spacing_m = cfg.get_double("world", "billboard_spacing_m", 0.0);
  spec.billboards.lateral_offset_m = cfg.get_double("world", "billboard_offset_m", 5.5);
  return spec;
}

WorldScene scene_from_config(const Config& cfg) {
  return build_road(road_spec_from_config(cfg), world_seed(cfg));
}

CameraRig rig_from_config(const Config& cfg) {
  CameraRig rig = standard_rig();
  const double off = cfg.get_double("rig", "side_offset_m", 0.5);
  if (off <= 0) throw ConfigError("config: [rig] side_offset_m must be positive");
  rig.cameras[rig.index_of("left")].mount.position.y() = off;
  rig.cameras[rig.index_of("right")].mount.position.y() = -off;
  return rig;
}

Recording record_from_config(const Config& cfg, const std::filesystem::path& dir,
                             const std::string& id, double bias_m, uint64_t seed_salt) {
  const WorldScene scene = scene_from_config(cfg);
  DriveOptions opt;
  opt.dt_s = cfg.get_double("record", "dt_s", 0.05);
  opt.bias_m = bias_m;
  opt.start_s = cfg.get_double("record", "start_s", 0.0);
  opt.end_margin_m = cfg.get_double("record", "end_margin_m", 115.0);
  const double speed = cfg.get_double("record", "speed_mps", 20.0);
  const double noise = cfg.get_double("record", "noise_sd_m", 0.2);
  const uint64_t drive_seed = mix_seed(world_seed(cfg), 0xd417eull, seed_salt);
  const EgoTrace trace = simulate_human_drive(scene, speed, noise, drive_seed, opt);
  const double rate = cfg.get_double("record", "frame_rate_hz", 4.0);
  return Recording::record(scene, trace, rig_from_config(cfg), rate, dir, id, cfg.hash());
}

AugmentConfig augment_config(const Config& cfg, const std::string& override_section) {
  const auto layered = [&](const std::string& key, const std::string& fallback) {
    return override_section.empty()
               ? cfg.get_string("augment", key, fallback)
               : cfg.get_layered(override_section, "augment", key, fallback);
  };
  const auto layered_d = [&](const std::string& key, double fallback) {
    const std::string v = layered(key, "");
    if (v.empty()) return fallback;
    try {
      size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config: augment key " + key + " = '" + v + "' is not a number");
    }
  };

  AugmentConfig a;
  a.shift_range_m = layered_d("shift_range_m", 1.0);
  a.yaw_range_rad = deg2rad(layered_d("yaw_range_deg", 5.0));

  const std::string weights = layered("camera_weights", "");
  if (!weights.empty()) {
    std::istringstream is(weights);
    double w;
    while (is >> w) a.camera_weights.push_back(w);
    if (!is.eof()) throw ConfigError("config: camera_weights must be a list of numbers");
  }

  const std::string source = layered("label_source", "centerline");
  if (source == "centerline")
    a.label_source = AugmentConfig::LabelSource::centerline;
  else if (source == "human_path")
    a.label_source = AugmentConfig::LabelSource::human_path;
  else
    throw ConfigError("config: label_source must be centerline or human_path");

  const std::string kind = layered("label_kind", "xyz");
  if (kind == "xyz")
    a.label_kind = LabelKind::xyz;
  else if (kind == "y")
    a.label_kind = LabelKind::y_only;
  else
    throw ConfigError("config: label_kind must be xyz or y");

  const std::string patch_kind = layered("patch_kind", "regular");
  if (patch_kind == "regular")
    a.patch.kind = PatchSpec::Kind::regular;
  else if (patch_kind == "multires")
    a.patch.kind = PatchSpec::Kind::multires;
  else
    throw ConfigError("config: patch_kind must be regular or multires");
  a.patch.out_w = static_cast<int>(layered_d("patch_w", 52));
  a.patch.out_h = static_cast<int>(layered_d("patch_h", 16));
  a.patch.ratio_w = layered_d("ratio_w", 2.0);
  a.patch.ratio_h = layered_d("ratio_h", 8.0);
  a.patch.roi.hfov_rad = deg2rad(layered_d("roi_hfov_deg", 53.0));
  a.patch.roi.ground_width_m = layered_d("roi_ground_width_m", 7.6);

  a.min_patch_validity = layered_d("min_patch_validity", 0.7);
  a.samples_per_frame = static_cast<int>(layered_d("samples_per_frame", 4));
  const std::string seed_str = layered("seed", "");
  if (seed_str.empty()) {
    a.seed = mix_seed(world_seed(cfg), 0xa462ull);
  } else {
    try {
      size_t pos = 0;
      a.seed = std::stoull(seed_str, &pos);
      if (pos != seed_str.size()) throw std::invalid_argument(seed_str);
    } catch (const std::exception&) {
      throw ConfigError("config: augment seed = '" + seed_str + "' is not an unsigned integer");
    }
  }
  return a;
}

ResimConfig resim_config(const Config& cfg) {
  ResimConfig r;
  r.dt_s = cfg.get_double("resim", "dt_s", 0.05);
  r.max_warp_offset_m = cfg.get_double("resim", "max_warp_offset_m", 1.5);
  r.max_warp_yaw_rad = deg2rad(cfg.get_double("resim", "max_warp_yaw_deg", 10.0));
  r.cooldown_m = cfg.get_double("resim", "cooldown_m", 50.0);
  r.lookahead_time_s = cfg.get_double("resim", "lookahead_time_s", 1.2);
  r.min_lookahead_m = cfg.get_double("resim", "min_lookahead_m", 8.0);
  r.max_steering_rad = cfg.get_double("resim", "max_steering_rad", 0.5);
  r.max_steps = cfg.get_u64("resim", "max_steps", 400000);
  r.config_hash = cfg.hash();
  return r;
}

VehicleSpec vehicle_from_config(const Config& cfg) {
  VehicleSpec v;
  v.wheelbase_m = cfg.get_double("resim", "wheelbase_m", 2.85);
  v.track_m = cfg.get_double("resim", "track_m", 1.6);
  return v;
}

namespace {

Recording open_or_record(const Config& cfg, const std::filesystem::path& dir,
                         const std::string& id, double bias_m, uint64_t seed_salt) {
  if (std::filesystem::exists(dir / "manifest.txt")) {
    Recording rec = Recording::open(dir);
    if (rec.config_hash() == cfg.hash() && rec.id() == id) return rec;
    std::filesystem::remove_all(dir);
  }
  return record_from_config(cfg, dir, id, bias_m, seed_salt);
}

// Arc-length-weighted mean lateral offset of the recorded drive itself.
double human_mean_offset(const Recording& rec) {
  double num = 0, den = 0;
  const double frame_dt = 1.0 / rec.frame_rate_hz();
  for (const auto& tick : rec.ticks()) {
    const double w = tick.speed * frame_dt;
    num += w * rec.centerline().project(tick.pose.position()).signed_offset;
    den += w;
  }
  if (den <= 0) throw RuntimeError("human_mean_offset: empty recording");
  return num / den;
}

}  // namespace

MapaRunResult run_mapa_experiment(const Config& cfg, const Policy& policy,
                                  const PatchSpec& patch_spec,
                                  const std::filesystem::path& work_dir) {
  const double bias_frac = cfg.get_double("mapa", "bias_frac", 0.8);
  const double lane = cfg.get_double("world", "lane_width_m", 3.7);
  const double bias = bias_frac * lane / 2.0;
  if (bias == 0) throw ConfigError("mapa: bias_frac must be nonzero");

  std::filesystem::create_directories(work_dir);
  const Recording left = open_or_record(cfg, work_dir / "rec_left", "rec_left", +bias, 101);
  const Recording right = open_or_record(cfg, work_dir / "rec_right", "rec_right", -bias, 102);

  ResimConfig rcfg = resim_config(cfg);
  rcfg.max_warp_offset_m =
      cfg.get_double("mapa", "max_warp_offset_m", rcfg.max_warp_offset_m);
  const VehicleSpec vehicle = vehicle_from_config(cfg);

  // Two independent recordings, no shared mutable state: run them in
  // parallel.
  auto left_future = std::async(std::launch::async, [&]() {
    return run_resim(left, policy, patch_spec, vehicle, rcfg);
  });
  MapaRunResult out;
  out.right_report = run_resim(right, policy, patch_spec, vehicle, rcfg);
  out.left_report = left_future.get();

  out.inputs.y_l = mean_lateral_offset(out.left_report);
  out.inputs.y_r = mean_lateral_offset(out.right_report);
  out.inputs.y_hl = human_mean_offset(left);
  out.inputs.y_hr = human_mean_offset(right);
  out.score_pct = mapa_score_pct(out.inputs);
  return out;
}

namespace {

std::string camera_names(const CameraRig& rig, const std::vector<double>& weights) {
  if (weights.empty()) {
    std::string all;
    for (const auto& c : rig.cameras) all += (all.empty() ? "" : "+") + c.name;
    return all;
  }
  std::string out;
  for (size_t i = 0; i < weights.size() && i < rig.cameras.size(); ++i)
    if (weights[i] > 0) out += (out.empty() ? "" : "+") + rig.cameras[i].name;
  return out;
}

StoryModelOutcome run_story_model(const Config& cfg, const std::string& section,
                                  const Recording& train_rec,
                                  const std::filesystem::path& out_dir) {
  const CameraRig rig = rig_from_config(cfg);
  AugmentConfig acfg = augment_config(cfg, section);
  if (section == "model_a") {
    // The narrative arm: imitate the human path, single center camera.
    if (!cfg.has(section, "label_source"))
      acfg.label_source = AugmentConfig::LabelSource::human_path;
    if (!cfg.has(section, "camera_weights")) {
      acfg.camera_weights.assign(rig.cameras.size(), 0.0);
      acfg.camera_weights[rig.index_of("center")] = 1.0;
    }
  } else {
    // The resolution arm: centerline labels, all cameras.
    if (!cfg.has(section, "label_source"))
      acfg.label_source = AugmentConfig::LabelSource::centerline;
    if (!cfg.has(section, "camera_weights"))
      acfg.camera_weights.assign(rig.cameras.size(), 1.0);
  }

  const std::filesystem::path store_path = out_dir / (section + ".pnss");
  const StoreBuildSummary built = build_store({&train_rec}, acfg, store_path);
  write_meta(store_path, cfg, "sample_store");

  StoreReader reader(store_path);
  const double lambda = cfg.get_double("train", "lambda", 3.0);
  const RidgeModel model = train_ridge(reader, lambda, acfg.patch);
  const std::filesystem::path model_path = out_dir / (section + ".pnrm");
  model.save(model_path);
  write_meta(model_path, cfg, "ridge_model");

  const RidgePolicy policy(model);
  const MapaRunResult mapa =
      run_mapa_experiment(cfg, policy, model.patch, out_dir / "mapa");
  save_report(mapa.left_report, out_dir / (section + "_left_report.txt"));
  save_report(mapa.right_report, out_dir / (section + "_right_report.txt"));

  StoryModelOutcome o;
  o.name = section;
  o.label_source =
      acfg.label_source == AugmentConfig::LabelSource::human_path ? "human_path" : "centerline";
  o.cameras = camera_names(rig, acfg.camera_weights);
  o.store_records = built.records;
  o.mapa_pct = mapa.score_pct;
  o.mapa_inputs = mapa.inputs;
  return o;
}

}  // namespace

StoryResult repro_mapa_story(const Config& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Recording train_rec =
      open_or_record(cfg, out_dir / "rec_train", "rec_train", 0.0, 0);

  StoryResult result;
  result.model_a = run_story_model(cfg, "model_a", train_rec, out_dir);
  result.model_b = run_story_model(cfg, "model_b", train_rec, out_dir);

  std::ostringstream os;
  os << "lanesim_mapa_story v1\n";
  os << "config_hash " << to_hex16(cfg.hash()) << "\n";
  os << "columns model label_source cameras store_records mapa_pct y_l y_r y_hl y_hr\n";
  for (const StoryModelOutcome* m : {&result.model_a, &result.model_b})
    os << m->name << " " << m->label_source << " " << m->cameras << " " << m->store_records
       << " " << format_double(m->mapa_pct) << " " << format_double(m->mapa_inputs.y_l) << " "
       << format_double(m->mapa_inputs.y_r) << " " << format_double(m->mapa_inputs.y_hl) << " "
       << format_double(m->mapa_inputs.y_hr) << "\n";
  os << "mapa_gap_pct " << format_double(result.model_a.mapa_pct - result.model_b.mapa_pct)
     << "\n";
  os << "end\n";
  result.summary_table = os.str();

  std::ofstream f(out_dir / "story_summary.txt", std::ios::trunc);
  if (!f) throw RuntimeError("repro_mapa_story: cannot write the summary");
  f << result.summary_table;
  return result;
}

ForkBenchResult fork_mdbf_experiment(const Config& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Recording train_rec =
      open_or_record(cfg, out_dir / "rec_train", "rec_train", 0.0, 0);
  const Recording eval_rec = open_or_record(cfg, out_dir / "rec_eval", "rec_eval", 0.0, 7);

  const ResimConfig rcfg = resim_config(cfg);
  const VehicleSpec vehicle = vehicle_from_config(cfg);
  const double lambda = cfg.get_double("train", "lambda", 3.0);

  struct Arm {
    const char* section;
    PatchSpec::Kind kind;
    MdbfResult mdbf;
  } arms[2] = {{"model_a", PatchSpec::Kind::regular, {}},
               {"model_b", PatchSpec::Kind::multires, {}}};

  std::ostringstream table;
  table << "lanesim_fork_bench v1\n";
  table << "config_hash " << to_hex16(cfg.hash()) << "\n";
  table << "columns patch_kind store_records failures distance_km mdbf_km\n";

  for (auto& arm : arms) {
    AugmentConfig acfg = augment_config(cfg, arm.section);
    if (!cfg.has(arm.section, "patch_kind")) acfg.patch.kind = arm.kind;
    const std::string kind_name =
        acfg.patch.kind == PatchSpec::Kind::regular ? "regular" : "multires";

    const std::filesystem::path store_path = out_dir / (kind_name + ".pnss");
    const StoreBuildSummary built = build_store({&train_rec}, acfg, store_path);
    write_meta(store_path, cfg, "sample_store");
    StoreReader reader(store_path);
    const RidgeModel model = train_ridge(reader, lambda, acfg.patch);
    const std::filesystem::path model_path = out_dir / (kind_name + ".pnrm");
    model.save(model_path);
    write_meta(model_path, cfg, "ridge_model");

    const RidgePolicy policy(model);
    const ResimReport report = run_resim(eval_rec, policy, model.patch, vehicle, rcfg);
    save_report(report, out_dir / (kind_name + "_report.txt"));
    arm.mdbf = mdbf(report);

    table << kind_name << " " << built.records << " " << report.failures.size() << " "
          << format_double(report.distance_m / 1000.0) << " "
          << (arm.mdbf.infinite ? std::string("inf") : format_double(arm.mdbf.km)) << "\n";
  }

  ForkBenchResult out;
  out.mdbf_regular_km = arms[0].mdbf.km;
  out.regular_infinite = arms[0].mdbf.infinite;
  out.mdbf_multires_km = arms[1].mdbf.km;
  out.multires_infinite = arms[1].mdbf.infinite;
  table << "end\n";
  out.summary_table = table.str();

  std::ofstream f(out_dir / "fork_summary.txt", std::ios::trunc);
  if (!f) throw RuntimeError("fork_mdbf_experiment: cannot write the summary");
  f << out.summary_table;
  return out;
}

void write_meta(const std::filesystem::path& artifact, const Config& cfg,
                const std::string& kind) {
  std::ofstream os(artifact.string() + ".meta", std::ios::trunc);
  if (!os) throw RuntimeError("write_meta: cannot open " + artifact.string() + ".meta");
  os << "lanesim_artifact_meta v1\n";
  os << "kind " << kind << "\n";
  os << "config_hash " << to_hex16(cfg.hash()) << "\n";
  os << "end\n";
}

}  // namespace lanesim
