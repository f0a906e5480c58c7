#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include "lanesim/labels.hpp"
#include "lanesim/patches.hpp"
#include "lanesim/recording.hpp"
#include "lanesim/warp.hpp"

namespace lanesim {

// One viewpoint perturbation: the virtual vehicle is displaced shift_right_m
// to the right (so a positive shift moves the road's features left in the
// view and the corrected label left-positive y values up) and rotated
// yaw_rad (positive left).
struct AugmentSpec {
  double shift_right_m = 0;
  double yaw_rad = 0;
};

enum class LabelKind : uint32_t { xyz = 0, y_only = 1 };

struct SampleMeta {
  uint8_t maneuver = 0;
  uint8_t camera = 0;
  uint32_t recording_index = 0;
  uint32_t frame_index = 0;
  double shift_right_m = 0;
  double yaw_rad = 0;
};

struct SampleRecord {
  std::vector<float> patch;  // patch_w * patch_h * channels, row-major interleaved
  std::vector<float> label;
  SampleMeta meta;
};

// Store file layout (PNSS v1, little-endian):
//   magic "PNSS" | version u32 | header_bytes u32 | record_count u64 |
//   patch_w u32 | patch_h u32 | patch_c u32 | label_dim u32 |
//   label_kind u32 | seed u64 | recording_count u32 |
//   { id_len u32 | id bytes } per recording
// followed by record_count fixed-size records:
//   patch f32[] | label f32[] | maneuver u8 | recording_index u32 |
//   frame_index u32 | camera u8 | shift f64 | yaw f64
struct StoreHeader {
  uint32_t patch_w = 0, patch_h = 0, patch_c = 0;
  uint32_t label_dim = 0;
  LabelKind label_kind = LabelKind::y_only;
  uint64_t seed = 0;
  uint64_t record_count = 0;
  std::vector<std::string> recording_ids;

  size_t record_bytes() const {
    return static_cast<size_t>(patch_w) * patch_h * patch_c * 4 + static_cast<size_t>(label_dim) * 4 +
           1 + 4 + 4 + 1 + 8 + 8;
  }
};

class StoreWriter {
 public:
  StoreWriter(const std::filesystem::path& path, const StoreHeader& header);
  void append(const SampleRecord& rec);
  // Patches the final record count into the header and closes the file.
  void finalize();
  uint64_t written() const { return written_; }

 private:
  std::ofstream file_;
  StoreHeader header_;
  uint64_t written_ = 0;
  bool finalized_ = false;
};

class StoreReader {
 public:
  explicit StoreReader(const std::filesystem::path& path);
  const StoreHeader& header() const { return header_; }
  uint64_t size() const { return header_.record_count; }
  // Sequential access; O(1) memory.
  bool next(SampleRecord* out);
  // Random access (seeks).
  SampleRecord read(uint64_t index);
  void rewind();

 private:
  std::ifstream file_;
  StoreHeader header_;
  uint64_t cursor_ = 0;
  std::streampos data_start_;
};

struct AugmentConfig {
  double shift_range_m = 1.0;   // uniform in [-range, +range]
  double yaw_range_rad = deg2rad(5.0);
  std::vector<double> camera_weights;  // per rig camera; normalized internally
  enum class LabelSource { centerline, human_path } label_source = LabelSource::centerline;
  LabelKind label_kind = LabelKind::xyz;
  PatchSpec patch;
  double min_patch_validity = 0.7;  // patch-area source coverage to accept
  int samples_per_frame = 4;
  uint64_t seed = 1;
};

struct StoreBuildSummary {
  uint64_t records = 0;
  uint64_t attempts = 0;
  double rejection_rate = 0;
};

// Deterministic sample generation: every (recording, frame, slot) draws from
// its own RNG stream, an accepted sample keeps the slot, and records land in
// a seeded shuffled order. Rebuilding with the same inputs is bit-identical.
StoreBuildSummary build_store(const std::vector<const Recording*>& recordings,
                              const AugmentConfig& cfg, const std::filesystem::path& out_path);

// The core augmentation op: warp `camera`'s frame to the standard camera at
// the perturbed vehicle pose, build the patch, and correct the label.
// Returns nothing when the patch's source coverage is below the threshold.
std::optional<SampleRecord> make_sample(const Recording& rec, uint32_t recording_index,
                                        uint32_t frame_index, uint8_t camera,
                                        const AugmentSpec& spec, const AugmentConfig& cfg);

}  // namespace lanesim
