#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lanesim/experiment.hpp"

using namespace lanesim;
namespace fs = std::filesystem;

TEST_SUITE("experiment") {

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("lanesim_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("parse_road builds segments from the DSL") {
  const auto segs = parse_road("straight:400 arc:250:0.5 arc:100:-0.25 fork:120:left:6");
  REQUIRE(segs.size() == 4);
  CHECK(std::get<StraightSegment>(segs[0]).length_m == 400.0);
  // Arcs are given as length and signed angle; radius = length / |angle|.
  CHECK(std::get<ArcSegment>(segs[1]).radius_m == 500.0);
  CHECK(std::get<ArcSegment>(segs[1]).angle_rad == 0.5);
  CHECK(std::get<ArcSegment>(segs[2]).radius_m == 400.0);
  CHECK(std::get<ArcSegment>(segs[2]).angle_rad == -0.25);
  CHECK(std::get<ForkSegment>(segs[3]).length_m == 120.0);
  CHECK(std::get<ForkSegment>(segs[3]).side == +1);
  CHECK(std::get<ForkSegment>(segs[3]).end_offset_m == 6.0);

  CHECK(std::get<ForkSegment>(parse_road("fork:80:right:5.5")[0]).side == -1);

  CHECK_THROWS_WITH_AS(parse_road("straight"), doctest::Contains("expected straight"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_road("arc:100"), doctest::Contains("expected arc"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_road("arc:100:0"), doctest::Contains("angle must be nonzero"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_road("arc:-5:0.2"), doctest::Contains("length must be positive"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_road("fork:10:up:3"), doctest::Contains("fork side"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_road("loop:3"), doctest::Contains("unknown segment kind"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_road("straight:abc"), doctest::Contains("bad number"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_road("  "), doctest::Contains("no segments"), ConfigError);
}

TEST_CASE("road_spec_from_config reads the world section") {
  const Config cfg = Config::from_string(
      "[world]\nroad = straight:200\nlane_width_m = 4.2\nline_width_m = 0.2\n"
      "dash_period_m = 12\ndash_fill = 0.5\nsample_step_m = 0.5\n"
      "billboard_spacing_m = 80\nbillboard_offset_m = 6\n");
  const RoadSpec spec = road_spec_from_config(cfg);
  CHECK(spec.segments.size() == 1);
  CHECK(spec.lane_width_m == 4.2);
  CHECK(spec.line_width_m == 0.2);
  CHECK(spec.dash_period_m == 12.0);
  CHECK(spec.dash_fill == 0.5);
  CHECK(spec.sample_step_m == 0.5);
  CHECK(spec.billboards.spacing_m == 80.0);
  CHECK(spec.billboards.lateral_offset_m == 6.0);

  // Only the road layout is mandatory.
  const RoadSpec dflt = road_spec_from_config(Config::from_string("[world]\nroad = straight:80\n"));
  CHECK(dflt.lane_width_m == 3.7);
  CHECK(dflt.billboards.spacing_m == 0.0);
  CHECK_THROWS_WITH_AS(road_spec_from_config(Config::from_string("[world]\nseed = 1\n")),
                       doctest::Contains("road is required"), ConfigError);
}

TEST_CASE("world_seed prefers the override, then the config, then 1") {
  Config cfg = Config::from_string("[world]\nseed = 42\nroad = straight:80\n");
  CHECK(world_seed(cfg) == 42);
  cfg.override_seed(9);
  CHECK(world_seed(cfg) == 9);
  CHECK(world_seed(Config::from_string("[world]\nroad = straight:80\n")) == 1);
}

TEST_CASE("rig_from_config places the side cameras") {
  const CameraRig dflt = rig_from_config(Config::from_string("[world]\nroad = straight:80\n"));
  CHECK(dflt.cameras[dflt.index_of("left")].mount.position.y() == 0.5);
  CHECK(dflt.cameras[dflt.index_of("right")].mount.position.y() == -0.5);

  const CameraRig wide =
      rig_from_config(Config::from_string("[rig]\nside_offset_m = 0.7\n"));
  CHECK(wide.cameras[wide.index_of("left")].mount.position.y() == 0.7);
  CHECK(wide.cameras[wide.index_of("right")].mount.position.y() == -0.7);
  // The center camera stays on the standard mount.
  CHECK(wide.cameras[wide.index_of("center")].mount.position ==
        standard_camera_mount().position);

  CHECK_THROWS_AS(rig_from_config(Config::from_string("[rig]\nside_offset_m = 0\n")),
                  ConfigError);
}

TEST_CASE("augment_config layers model sections over the augment section") {
  const Config cfg = Config::from_string(
      "[world]\nseed = 3\nroad = straight:80\n"
      "[augment]\nshift_range_m = 0.9\nyaw_range_deg = 4\nlabel_kind = y\n"
      "patch_w = 40\npatch_h = 12\nratio_w = 3\nratio_h = 6\nroi_hfov_deg = 50\n"
      "roi_ground_width_m = 8\nmin_patch_validity = 0.75\nsamples_per_frame = 2\n"
      "camera_weights = 0 0 1\n"
      "[model_b]\npatch_kind = multires\nlabel_source = human_path\nseed = 77\n");

  const AugmentConfig base = augment_config(cfg);
  CHECK(base.shift_range_m == 0.9);
  CHECK(base.yaw_range_rad == deg2rad(4.0));
  CHECK(base.label_kind == LabelKind::y_only);
  CHECK(base.label_source == AugmentConfig::LabelSource::centerline);
  CHECK(base.patch.kind == PatchSpec::Kind::regular);
  CHECK(base.patch.out_w == 40);
  CHECK(base.patch.out_h == 12);
  CHECK(base.patch.ratio_w == 3.0);
  CHECK(base.patch.ratio_h == 6.0);
  CHECK(base.patch.roi.hfov_rad == deg2rad(50.0));
  CHECK(base.patch.roi.ground_width_m == 8.0);
  CHECK(base.min_patch_validity == 0.75);
  CHECK(base.samples_per_frame == 2);
  CHECK(base.camera_weights == std::vector<double>{0.0, 0.0, 1.0});
  // Without an explicit seed the augment stream derives from the world seed.
  CHECK(base.seed == mix_seed(world_seed(cfg), 0xa462ull));

  const AugmentConfig layered = augment_config(cfg, "model_b");
  CHECK(layered.patch.kind == PatchSpec::Kind::multires);
  CHECK(layered.label_source == AugmentConfig::LabelSource::human_path);
  CHECK(layered.seed == 77);
  // Keys the override section does not set fall through to [augment].
  CHECK(layered.shift_range_m == 0.9);
  CHECK(layered.patch.out_w == 40);

  CHECK_THROWS_AS(augment_config(Config::from_string("[augment]\nlabel_source = gps\n")),
                  ConfigError);
  CHECK_THROWS_AS(augment_config(Config::from_string("[augment]\nlabel_kind = xy\n")),
                  ConfigError);
  CHECK_THROWS_AS(augment_config(Config::from_string("[augment]\npatch_kind = huge\n")),
                  ConfigError);
  CHECK_THROWS_AS(augment_config(Config::from_string("[augment]\nseed = 12x\n")), ConfigError);
  CHECK_THROWS_AS(augment_config(Config::from_string("[augment]\nshift_range_m = wide\n")),
                  ConfigError);
}

TEST_CASE("resim and vehicle configs carry their keys and the config hash") {
  const Config cfg = Config::from_string(
      "[resim]\ndt_s = 0.04\nmax_warp_offset_m = 2.2\nmax_warp_yaw_deg = 8\ncooldown_m = 60\n"
      "lookahead_time_s = 1.5\nmin_lookahead_m = 9\nmax_steering_rad = 0.4\nmax_steps = 1000\n"
      "wheelbase_m = 3.0\ntrack_m = 1.7\n");
  const ResimConfig r = resim_config(cfg);
  CHECK(r.dt_s == 0.04);
  CHECK(r.max_warp_offset_m == 2.2);
  CHECK(r.max_warp_yaw_rad == deg2rad(8.0));
  CHECK(r.cooldown_m == 60.0);
  CHECK(r.lookahead_time_s == 1.5);
  CHECK(r.min_lookahead_m == 9.0);
  CHECK(r.max_steering_rad == 0.4);
  CHECK(r.max_steps == 1000);
  CHECK(r.config_hash == cfg.hash());

  const VehicleSpec v = vehicle_from_config(cfg);
  CHECK(v.wheelbase_m == 3.0);
  CHECK(v.track_m == 1.7);

  const ResimConfig dflt = resim_config(Config::from_string("[world]\nroad = straight:80\n"));
  CHECK(dflt.dt_s == 0.05);
  CHECK(dflt.max_warp_offset_m == 1.5);
  CHECK(dflt.max_steps == 400000);
}

TEST_CASE("record_from_config is deterministic and honors the bias override") {
  TempDir tmp("experiment_record");
  const Config cfg = Config::from_string(
      "[world]\nseed = 5\nroad = straight:150\n"
      "[record]\nspeed_mps = 10\nnoise_sd_m = 0\nframe_rate_hz = 4\n");

  const Recording a = record_from_config(cfg, tmp.path / "a", "twin");
  const Recording b = record_from_config(cfg, tmp.path / "b", "twin");
  CHECK(a.id() == "twin");
  CHECK(a.config_hash() == cfg.hash());
  REQUIRE(a.ticks().size() == b.ticks().size());
  // Same config, same id: the manifests are byte-identical.
  CHECK(slurp(tmp.path / "a" / "manifest.txt") == slurp(tmp.path / "b" / "manifest.txt"));

  // A seed salt decorrelates the drive noise.
  const Config noisy = Config::from_string(
      "[world]\nseed = 5\nroad = straight:150\n"
      "[record]\nspeed_mps = 10\nnoise_sd_m = 0.2\nframe_rate_hz = 4\n");
  const Recording n0 = record_from_config(noisy, tmp.path / "n0", "twin", 0.0, 0);
  const Recording n1 = record_from_config(noisy, tmp.path / "n1", "twin", 0.0, 1);
  bool any_differs = false;
  for (size_t i = 0; i < std::min(n0.ticks().size(), n1.ticks().size()); ++i)
    any_differs = any_differs || n0.ticks()[i].pose.y != n1.ticks()[i].pose.y;
  CHECK(any_differs);

  // The bias override shifts the whole drive laterally.
  const Recording biased = record_from_config(cfg, tmp.path / "biased", "twin", 1.0);
  double mean = 0;
  for (const auto& t : biased.ticks())
    mean += biased.centerline().project(t.pose.position()).signed_offset;
  mean /= static_cast<double>(biased.ticks().size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("the mapa experiment scores the oracle near zero and reuses recordings") {
  TempDir tmp("experiment_mapa");
  const Config cfg = Config::from_string(
      "[world]\nseed = 6\nroad = straight:250\n"
      "[record]\nspeed_mps = 10\nnoise_sd_m = 0\nframe_rate_hz = 4\n"
      "[mapa]\nbias_frac = 0.4\n");
  OraclePolicy oracle;

  const MapaRunResult first = run_mapa_experiment(cfg, oracle, PatchSpec{}, tmp.path);
  // bias = bias_frac * lane_width / 2 on each side.
  const double bias = 0.4 * 3.7 / 2.0;
  CHECK(first.inputs.y_hl == doctest::Approx(bias).epsilon(0.02));
  CHECK(first.inputs.y_hr == doctest::Approx(-bias).epsilon(0.02));
  // The oracle ignores the human bias entirely.
  CHECK(std::abs(first.inputs.y_l) < 0.03);
  CHECK(std::abs(first.inputs.y_r) < 0.03);
  CHECK(first.score_pct < 5.0);
  CHECK(first.score_pct == mapa_score_pct(first.inputs));
  CHECK(first.left_report.failures.empty());
  CHECK(first.right_report.failures.empty());

  // A second run under the same config reuses the recordings on disk.
  std::ofstream(tmp.path / "rec_left" / "KEEP") << "marker\n";
  const std::string manifest_before = slurp(tmp.path / "rec_left" / "manifest.txt");
  const MapaRunResult again = run_mapa_experiment(cfg, oracle, PatchSpec{}, tmp.path);
  CHECK(fs::exists(tmp.path / "rec_left" / "KEEP"));
  CHECK(slurp(tmp.path / "rec_left" / "manifest.txt") == manifest_before);
  CHECK(again.inputs.y_hl == first.inputs.y_hl);
  CHECK(again.inputs.y_hr == first.inputs.y_hr);
  CHECK(again.score_pct == first.score_pct);

  // A config change invalidates the cache and re-records.
  Config changed = cfg;
  changed.override_seed(123);
  run_mapa_experiment(changed, oracle, PatchSpec{}, tmp.path);
  CHECK(!fs::exists(tmp.path / "rec_left" / "KEEP"));
  CHECK(slurp(tmp.path / "rec_left" / "manifest.txt") != manifest_before);

  CHECK_THROWS_WITH_AS(
      run_mapa_experiment(Config::from_string("[world]\nroad = straight:250\n"
                                              "[mapa]\nbias_frac = 0\n"),
                          oracle, PatchSpec{}, tmp.path),
      doctest::Contains("bias_frac"), ConfigError);
}

TEST_CASE("write_meta drops a provenance sidecar next to the artifact") {
  TempDir tmp("experiment_meta");
  Config cfg = Config::from_string("[world]\nseed = 2\nroad = straight:80\n");
  const fs::path artifact = tmp.path / "model.pnrm";
  std::ofstream(artifact) << "x";
  write_meta(artifact, cfg, "ridge_model");
  CHECK(slurp(tmp.path / "model.pnrm.meta") ==
        "lanesim_artifact_meta v1\nkind ridge_model\nconfig_hash " + to_hex16(cfg.hash()) +
            "\nend\n");
}

}  // TEST_SUITE
