#pragma once

#include "lanesim/config.hpp"
#include "lanesim/metrics.hpp"
#include "lanesim/policy.hpp"
#include "lanesim/recording.hpp"
#include "lanesim/resim.hpp"
#include "lanesim/store.hpp"

namespace lanesim {

// "straight:<len> arc:<len>:<angle_rad> fork:<len>:<left|right>:<offset_m>",
// whitespace-separated; arcs are signed, positive angle = left turn.
std::vector<RoadSegment> parse_road(const std::string& dsl);

RoadSpec road_spec_from_config(const Config& cfg);
WorldScene scene_from_config(const Config& cfg);
uint64_t world_seed(const Config& cfg);

CameraRig rig_from_config(const Config& cfg);

// Drives and renders one recording into dir. bias_override replaces the
// config's human-path bias (used by the MAPA protocol); seed_salt decorrelates
// the lateral noise between recordings of the same config.
Recording record_from_config(const Config& cfg, const std::filesystem::path& dir,
                             const std::string& id, double bias_m = 0,
                             uint64_t seed_salt = 0);

// AugmentConfig from [augment], with keys optionally overridden by a
// [model_a]/[model_b] style section (empty string = no override layer).
AugmentConfig augment_config(const Config& cfg, const std::string& override_section = "");

ResimConfig resim_config(const Config& cfg);
VehicleSpec vehicle_from_config(const Config& cfg);

struct MapaRunResult {
  MapaInputs inputs;
  double score_pct = 0;
  ResimReport left_report;   // left-biased recording
  ResimReport right_report;  // right-biased recording
};

// The left/right-biased protocol: record two drives hugging opposite lane
// edges, resimulate the policy on both, and score the offset transfer.
// Recordings are created under work_dir and reused when already present.
MapaRunResult run_mapa_experiment(const Config& cfg, const Policy& policy,
                                  const PatchSpec& patch_spec,
                                  const std::filesystem::path& work_dir);

struct StoryModelOutcome {
  std::string name;           // "model_a" or "model_b"
  std::string label_source;   // provenance echoed into the summary table
  std::string cameras;
  uint64_t store_records = 0;
  double mapa_pct = 0;
  MapaInputs mapa_inputs;
};

struct StoryResult {
  StoryModelOutcome model_a;  // human-path labels, center camera only
  StoryModelOutcome model_b;  // centerline labels, all three cameras
  std::string summary_table;
};

// End-to-end differential: one training recording, two ridge models that
// differ only in label source and camera selection, MAPA for both. All
// artifacts land under out_dir; a summary table is written and returned.
StoryResult repro_mapa_story(const Config& cfg, const std::filesystem::path& out_dir);

struct ForkBenchResult {
  double mdbf_regular_km = 0;
  bool regular_infinite = false;
  double mdbf_multires_km = 0;
  bool multires_infinite = false;
  std::string summary_table;
};

// Trains a regular-patch and a multi-res-patch model on the same recordings
// of a forked road and compares resim MDBF on a held-out drive.
ForkBenchResult fork_mdbf_experiment(const Config& cfg, const std::filesystem::path& out_dir);

// Sidecar provenance note written next to every binary artifact.
void write_meta(const std::filesystem::path& artifact, const Config& cfg,
                const std::string& kind);

}  // namespace lanesim
