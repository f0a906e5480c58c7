#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "lanesim/experiment.hpp"

namespace {

using namespace lanesim;

struct CommonOpts {
  std::string config_path;
  int64_t seed = -1;  // <0 = not given
};

Config load_config(const CommonOpts& c) {
  if (c.config_path.empty()) throw ConfigError("--config is required");
  Config cfg = Config::load(c.config_path);
  if (c.seed >= 0) cfg.override_seed(static_cast<uint64_t>(c.seed));
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "Experiment config file")->required();
  cmd->add_option("--seed", c.seed, "Override the [world] seed");
}

void write_polyline_section(std::ostream& os, const char* name, const ArcPolyline& poly) {
  os << name << " " << poly.size() << "\n";
  for (const auto& p : poly.points())
    os << "p " << format_double(p.x()) << " " << format_double(p.y()) << "\n";
}

int cmd_gen_world(const CommonOpts& c, const std::string& out) {
  const Config cfg = load_config(c);
  const WorldScene scene = scene_from_config(cfg);
  std::ofstream os(out, std::ios::trunc);
  if (!os) throw RuntimeError("gen-world: cannot open " + out);
  os << "lanesim_world_manifest v1\n";
  os << "config_hash " << to_hex16(cfg.hash()) << "\n";
  os << "seed " << scene.seed << "\n";
  os << "road_length_m " << format_double(scene.centerline.length()) << "\n";
  os << "lane_width_m " << format_double(scene.spec.lane_width_m) << "\n";
  write_polyline_section(os, "centerline", scene.centerline);
  write_polyline_section(os, "left_boundary", scene.left_boundary);
  write_polyline_section(os, "right_boundary", scene.right_boundary);
  os << "billboards " << scene.billboards.size() << "\n";
  for (const auto& b : scene.billboards)
    os << "b " << format_double(b.base.x()) << " " << format_double(b.base.y()) << " "
       << format_double(b.width_m) << " " << format_double(b.height_m) << " "
       << format_double(b.face_normal.x()) << " " << format_double(b.face_normal.y()) << " "
       << format_double(b.albedo[0]) << " " << format_double(b.albedo[1]) << " "
       << format_double(b.albedo[2]) << "\n";
  os << "forks " << scene.forks.size() << "\n";
  for (const auto& f : scene.forks)
    os << "f " << format_double(f.s_start) << " " << format_double(f.length_m) << " " << f.side
       << " " << format_double(f.end_offset_m) << "\n";
  os << "end\n";
  os.close();
  if (!os) throw RuntimeError("gen-world: write failed for " + out);

  std::ifstream back(out, std::ios::binary);
  std::ostringstream buf;
  buf << back.rdbuf();
  const std::string bytes = buf.str();
  std::cout << "world_manifest " << out << "\n";
  std::cout << "world_manifest_hash " << to_hex16(fnv1a64(bytes.data(), bytes.size())) << "\n";
  return 0;
}

int cmd_record(const CommonOpts& c, const std::string& out, std::string id, double bias,
               uint64_t salt) {
  const Config cfg = load_config(c);
  if (id.empty()) id = cfg.get_string("record", "id", "");
  if (id.empty()) id = std::filesystem::path(out).filename().string();
  const Recording rec = record_from_config(cfg, out, id, bias, salt);
  std::cout << "recording " << rec.dir().string() << "\n";
  std::cout << "ticks " << rec.ticks().size() << "\n";
  std::cout << "config_hash " << to_hex16(rec.config_hash()) << "\n";
  return 0;
}

int cmd_augment(const CommonOpts& c, const std::string& out,
                const std::vector<std::string>& recording_dirs, const std::string& variant) {
  const Config cfg = load_config(c);
  const AugmentConfig acfg = augment_config(cfg, variant);
  std::vector<Recording> recs;
  recs.reserve(recording_dirs.size());
  for (const auto& dir : recording_dirs) recs.push_back(Recording::open(dir));
  std::vector<const Recording*> ptrs;
  for (const auto& r : recs) ptrs.push_back(&r);
  const StoreBuildSummary summary = build_store(ptrs, acfg, out);
  write_meta(out, cfg, "sample_store");
  std::cout << "store " << out << "\n";
  std::cout << "records " << summary.records << "\n";
  std::cout << "attempts " << summary.attempts << "\n";
  std::cout << "rejection_rate " << format_double(summary.rejection_rate) << "\n";
  return 0;
}

int cmd_train(const CommonOpts& c, const std::string& store_path, double lambda,
              const std::string& out, const std::string& variant) {
  const Config cfg = load_config(c);
  const AugmentConfig acfg = augment_config(cfg, variant);
  if (lambda < 0) lambda = cfg.get_double("train", "lambda", 3.0);
  StoreReader reader(store_path);
  const RidgeModel model = train_ridge(reader, lambda, acfg.patch);
  model.save(out);
  write_meta(out, cfg, "ridge_model");
  std::cout << "model " << out << "\n";
  std::cout << "records " << reader.size() << "\n";
  std::cout << "lambda " << format_double(lambda) << "\n";
  return 0;
}

PatchSpec policy_patch_spec(const Config& cfg, const Policy& policy,
                            const std::string& policy_spec) {
  if (policy_spec.rfind("model:", 0) == 0)
    return dynamic_cast<const RidgePolicy&>(policy).model().patch;
  return augment_config(cfg, "").patch;
}

int cmd_resim(const CommonOpts& c, const std::string& recording_dir,
              const std::string& policy_spec, const std::string& report_path) {
  const Config cfg = load_config(c);
  const Recording rec = Recording::open(recording_dir);
  const auto policy = make_policy(policy_spec);
  const PatchSpec patch = policy_patch_spec(cfg, *policy, policy_spec);
  ResimConfig rcfg = resim_config(cfg);
  const ResimReport report = run_resim(rec, *policy, patch, vehicle_from_config(cfg), rcfg);
  save_report(report, report_path);
  std::cout << "report " << report_path << "\n";
  std::cout << "distance_km " << format_double(report.distance_m / 1000.0) << "\n";
  std::cout << "failures " << report.failures.size() << "\n";
  return 0;
}

int cmd_mapa(const CommonOpts& c, const std::string& policy_spec, const std::string& workdir,
             const std::string& out) {
  const Config cfg = load_config(c);
  const auto policy = make_policy(policy_spec);
  const PatchSpec patch = policy_patch_spec(cfg, *policy, policy_spec);
  const MapaRunResult r = run_mapa_experiment(cfg, *policy, patch, workdir);
  std::ostringstream os;
  os << "lanesim_mapa_result v1\n";
  os << "config_hash " << to_hex16(cfg.hash()) << "\n";
  os << "policy " << policy->name() << "\n";
  os << "y_l " << format_double(r.inputs.y_l) << "\n";
  os << "y_r " << format_double(r.inputs.y_r) << "\n";
  os << "y_hl " << format_double(r.inputs.y_hl) << "\n";
  os << "y_hr " << format_double(r.inputs.y_hr) << "\n";
  os << "mapa_pct " << format_double(r.score_pct) << "\n";
  os << "end\n";
  std::cout << os.str();
  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw RuntimeError("mapa: cannot open " + out);
    f << os.str();
  }
  return 0;
}

int cmd_report(const std::string& report_path, const std::string& out, const std::string& csv,
               double comfort_k) {
  const ResimReport report = load_report(report_path);
  const MetricSummary summary = summarize(report, comfort_k);
  const std::string text = summary_text(summary);
  std::cout << text;
  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw RuntimeError("report: cannot open " + out);
    f << text;
  }
  if (!csv.empty()) write_series_csv(report, csv);
  return 0;
}

int cmd_story(const CommonOpts& c, const std::string& out_dir) {
  const Config cfg = load_config(c);
  const StoryResult r = repro_mapa_story(cfg, out_dir);
  std::cout << r.summary_table;
  return 0;
}

int cmd_fork_bench(const CommonOpts& c, const std::string& out_dir) {
  const Config cfg = load_config(c);
  const ForkBenchResult r = fork_mdbf_experiment(cfg, out_dir);
  std::cout << r.summary_table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lane-keeping data and evaluation machinery"};
  app.require_subcommand(1);

  CommonOpts c_world, c_record, c_augment, c_train, c_resim, c_mapa, c_story, c_fork;
  std::string out, rec_id, store_path, policy_spec, recording_dir, report_path, csv_path,
      variant;
  std::vector<std::string> recording_dirs;
  double bias = 0, lambda = -1, comfort_k = 20.0;
  uint64_t salt = 0;

  auto* gen = app.add_subcommand("gen-world", "Build the world and write its manifest");
  add_common(gen, c_world);
  gen->add_option("--out", out, "Manifest file path")->required();

  auto* rec = app.add_subcommand("record", "Drive the synthetic world and render a recording");
  add_common(rec, c_record);
  rec->add_option("--out", out, "Recording directory")->required();
  rec->add_option("--id", rec_id, "Recording id (default: [record] id or the directory name)");
  rec->add_option("--bias", bias, "Constant lateral bias of the drive, m (left positive)");
  rec->add_option("--salt", salt, "Extra seed salt decorrelating this drive");

  auto* aug = app.add_subcommand("augment", "Build a shuffled sample store from recordings");
  add_common(aug, c_augment);
  aug->add_option("--out", out, "Store file path")->required();
  aug->add_option("--recording", recording_dirs, "Recording directory (repeatable)")
      ->required()
      ->take_all();
  aug->add_option("--variant", variant, "Config section layered over [augment]");

  auto* train = app.add_subcommand("train", "Fit the ridge model on a sample store");
  add_common(train, c_train);
  train->add_option("--store", store_path, "Sample store path")->required();
  train->add_option("--lambda", lambda, "Ridge regularization (default: [train] lambda)");
  train->add_option("--out", out, "Model file path")->required();
  train->add_option("--variant", variant, "Config section layered over [augment]");

  auto* resim = app.add_subcommand("resim", "Closed-loop resimulation over a recording");
  add_common(resim, c_resim);
  resim->add_option("--recording", recording_dir, "Recording directory")->required();
  resim->add_option("--policy", policy_spec, "oracle, cheater, or model:<file>")->required();
  resim->add_option("--report", report_path, "Report file path")->required();

  auto* mapa = app.add_subcommand("mapa", "Left/right-biased artifact-affinity experiment");
  add_common(mapa, c_mapa);
  mapa->add_option("--policy", policy_spec, "oracle, cheater, or model:<file>")->required();
  mapa->add_option("--workdir", recording_dir, "Directory for the biased recordings")
      ->required();
  mapa->add_option("--out", out, "Result file path (optional)");

  auto* rep = app.add_subcommand("report", "Metric summary and CSV series from a resim report");
  rep->add_option("--report", report_path, "Resim report path")->required();
  rep->add_option("--out", out, "Summary file path (optional)");
  rep->add_option("--csv", csv_path, "Time-series CSV path (optional)");
  rep->add_option("--comfort-k", comfort_k, "Comfort scale per m/s^3 of jerk");

  auto* story = app.add_subcommand(
      "repro-mapa-story", "End-to-end two-model artifact-affinity differential");
  add_common(story, c_story);
  story->add_option("--out", out, "Output directory")->required();

  auto* fork = app.add_subcommand("fork-bench",
                                  "Regular vs multi-resolution patch MDBF on a forked road");
  add_common(fork, c_fork);
  fork->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_world(c_world, out);
    if (rec->parsed()) return cmd_record(c_record, out, rec_id, bias, salt);
    if (aug->parsed()) return cmd_augment(c_augment, out, recording_dirs, variant);
    if (train->parsed()) return cmd_train(c_train, store_path, lambda, out, variant);
    if (resim->parsed()) return cmd_resim(c_resim, recording_dir, policy_spec, report_path);
    if (mapa->parsed()) return cmd_mapa(c_mapa, policy_spec, recording_dir, out);
    if (rep->parsed()) return cmd_report(report_path, out, csv_path, comfort_k);
    if (story->parsed()) return cmd_story(c_story, out);
    if (fork->parsed()) return cmd_fork_bench(c_fork, out);
  } catch (const lanesim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
