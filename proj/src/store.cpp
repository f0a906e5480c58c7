#include "lanesim/store.hpp"

#include <cstring>

#include "lanesim/world.hpp"

namespace lanesim {
namespace {

constexpr char kMagic[4] = {'P', 'N', 'S', 'S'};
constexpr uint32_t kVersion = 1;
constexpr std::streamoff kRecordCountOffset = 12;  // after magic, version, header_bytes

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f32(std::ostream& os, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(os, u);
}

void put_f64(std::ostream& os, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(os, u);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

float get_f32(std::istream& is) {
  uint32_t u = get_u32(is);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

double get_f64(std::istream& is) {
  uint64_t u = get_u64(is);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

size_t header_bytes_for(const StoreHeader& h) {
  size_t n = 4 + 4 + 4 + 8 + 4 * 5 + 8 + 4;
  for (const auto& id : h.recording_ids) n += 4 + id.size();
  return n;
}

}  // namespace

StoreWriter::StoreWriter(const std::filesystem::path& path, const StoreHeader& header)
    : header_(header) {
  if (header_.patch_w == 0 || header_.patch_h == 0 || header_.patch_c == 0 ||
      header_.label_dim == 0)
    throw ConfigError("store: header dimensions must be positive");
  file_.open(path, std::ios::binary | std::ios::trunc);
  if (!file_) throw RuntimeError("store: cannot open " + path.string() + " for writing");
  file_.write(kMagic, 4);
  put_u32(file_, kVersion);
  put_u32(file_, static_cast<uint32_t>(header_bytes_for(header_)));
  put_u64(file_, 0);  // record count, patched in finalize()
  put_u32(file_, header_.patch_w);
  put_u32(file_, header_.patch_h);
  put_u32(file_, header_.patch_c);
  put_u32(file_, header_.label_dim);
  put_u32(file_, static_cast<uint32_t>(header_.label_kind));
  put_u64(file_, header_.seed);
  put_u32(file_, static_cast<uint32_t>(header_.recording_ids.size()));
  for (const auto& id : header_.recording_ids) {
    put_u32(file_, static_cast<uint32_t>(id.size()));
    file_.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
}

void StoreWriter::append(const SampleRecord& rec) {
  if (finalized_) throw RuntimeError("store: append after finalize");
  const size_t patch_n = static_cast<size_t>(header_.patch_w) * header_.patch_h * header_.patch_c;
  if (rec.patch.size() != patch_n) throw RuntimeError("store: patch size mismatch");
  if (rec.label.size() != header_.label_dim) throw RuntimeError("store: label size mismatch");
  if (rec.meta.recording_index >= header_.recording_ids.size())
    throw RuntimeError("store: recording index out of range");
  for (float v : rec.patch) put_f32(file_, v);
  for (float v : rec.label) put_f32(file_, v);
  file_.put(static_cast<char>(rec.meta.maneuver));
  put_u32(file_, rec.meta.recording_index);
  put_u32(file_, rec.meta.frame_index);
  file_.put(static_cast<char>(rec.meta.camera));
  put_f64(file_, rec.meta.shift_right_m);
  put_f64(file_, rec.meta.yaw_rad);
  ++written_;
}

void StoreWriter::finalize() {
  if (finalized_) return;
  file_.seekp(kRecordCountOffset);
  put_u64(file_, written_);
  file_.close();
  if (!file_) throw RuntimeError("store: write failed on finalize");
  finalized_ = true;
}

StoreReader::StoreReader(const std::filesystem::path& path) {
  file_.open(path, std::ios::binary);
  if (!file_) throw RuntimeError("store: cannot open " + path.string());
  char magic[4];
  file_.read(magic, 4);
  if (!file_ || std::memcmp(magic, kMagic, 4) != 0)
    throw RuntimeError("store: bad magic in " + path.string());
  const uint32_t version = get_u32(file_);
  if (version != kVersion) throw RuntimeError("store: unsupported version");
  const uint32_t header_bytes = get_u32(file_);
  header_.record_count = get_u64(file_);
  header_.patch_w = get_u32(file_);
  header_.patch_h = get_u32(file_);
  header_.patch_c = get_u32(file_);
  header_.label_dim = get_u32(file_);
  const uint32_t kind = get_u32(file_);
  if (kind > 1) throw RuntimeError("store: unknown label kind");
  header_.label_kind = static_cast<LabelKind>(kind);
  header_.seed = get_u64(file_);
  const uint32_t nrec = get_u32(file_);
  for (uint32_t i = 0; i < nrec; ++i) {
    const uint32_t len = get_u32(file_);
    if (len > 4096) throw RuntimeError("store: recording id too long");
    std::string id(len, '\0');
    file_.read(id.data(), len);
    header_.recording_ids.push_back(std::move(id));
  }
  if (!file_) throw RuntimeError("store: truncated header");
  if (header_bytes != header_bytes_for(header_))
    throw RuntimeError("store: header size mismatch");
  data_start_ = static_cast<std::streampos>(header_bytes);

  file_.seekg(0, std::ios::end);
  const auto file_size = static_cast<uint64_t>(file_.tellg());
  const uint64_t expect = header_bytes + header_.record_count * header_.record_bytes();
  if (file_size != expect)
    throw RuntimeError("store: file length does not match the declared record count");
  file_.seekg(data_start_);
}

bool StoreReader::next(SampleRecord* out) {
  if (cursor_ >= header_.record_count) return false;
  const size_t patch_n = static_cast<size_t>(header_.patch_w) * header_.patch_h * header_.patch_c;
  out->patch.resize(patch_n);
  out->label.resize(header_.label_dim);
  for (auto& v : out->patch) v = get_f32(file_);
  for (auto& v : out->label) v = get_f32(file_);
  out->meta.maneuver = static_cast<uint8_t>(file_.get());
  out->meta.recording_index = get_u32(file_);
  out->meta.frame_index = get_u32(file_);
  out->meta.camera = static_cast<uint8_t>(file_.get());
  out->meta.shift_right_m = get_f64(file_);
  out->meta.yaw_rad = get_f64(file_);
  if (!file_) throw RuntimeError("store: truncated record");
  ++cursor_;
  return true;
}

SampleRecord StoreReader::read(uint64_t index) {
  if (index >= header_.record_count) throw RuntimeError("store: record index out of range");
  file_.clear();
  file_.seekg(data_start_ + static_cast<std::streamoff>(index * header_.record_bytes()));
  cursor_ = index;
  SampleRecord rec;
  next(&rec);
  return rec;
}

void StoreReader::rewind() {
  file_.clear();
  file_.seekg(data_start_);
  cursor_ = 0;
}

std::optional<SampleRecord> make_sample(const Recording& rec, uint32_t recording_index,
                                        uint32_t frame_index, uint8_t camera,
                                        const AugmentSpec& spec, const AugmentConfig& cfg) {
  const auto& rig = rec.rig();
  if (camera >= rig.cameras.size()) throw ConfigError("make_sample: camera index out of range");
  if (frame_index >= rec.ticks().size())
    throw ConfigError("make_sample: frame index out of range");
  const Pose2& vehicle = rec.ticks()[frame_index].pose;

  // The virtual vehicle sits shift_right_m to the recorded pose's right and
  // is rotated by yaw_rad; the standard camera rides on it, so any mounted
  // camera's offset folds into the warp.
  Pose2 perturbed = vehicle;
  perturbed.x += spec.shift_right_m * std::sin(vehicle.psi);
  perturbed.y -= spec.shift_right_m * std::cos(vehicle.psi);
  perturbed.psi = vehicle.psi + spec.yaw_rad;

  const CameraPose src_cam = camera_world_pose(vehicle, rig.cameras[camera].mount);
  const CameraPose dst_cam = camera_world_pose(perturbed, standard_camera_mount());

  const ImageBuffer frame = rec.frame(frame_index, camera);
  const WarpResult warp = warp_viewpoint(frame, src_cam, dst_cam, rig.intrinsics);

  // Validity is measured over the patch's own source area, not the raster.
  const ImageBuffer mask_patch =
      build_patch(warp.mask, rig.intrinsics, standard_camera_mount(), cfg.patch);
  double mask_sum = 0;
  for (size_t i = 0; i < mask_patch.size(); ++i) mask_sum += mask_patch.data()[i];
  const double validity = mask_sum / static_cast<double>(mask_patch.size());
  if (validity < cfg.min_patch_validity) return std::nullopt;

  const ImageBuffer patch =
      build_patch(warp.image, rig.intrinsics, standard_camera_mount(), cfg.patch);

  const ArcPolyline& source = cfg.label_source == AugmentConfig::LabelSource::human_path
                                  ? rec.human_path()
                                  : rec.centerline();
  TrajectoryLabel label = extract_local_trajectory(source, vehicle);
  label = correct_label(label, spec.shift_right_m, spec.yaw_rad);

  SampleRecord out;
  out.patch.assign(patch.data(), patch.data() + patch.size());
  if (cfg.label_kind == LabelKind::y_only) {
    const auto ys = label.y_components();
    out.label.assign(ys.begin(), ys.end());
  } else {
    const auto xyz = label.flattened_xyz();
    out.label.assign(xyz.begin(), xyz.end());
  }
  out.meta.maneuver = static_cast<uint8_t>(Maneuver::lane_follow);
  out.meta.camera = camera;
  out.meta.recording_index = recording_index;
  out.meta.frame_index = frame_index;
  out.meta.shift_right_m = spec.shift_right_m;
  out.meta.yaw_rad = spec.yaw_rad;
  return out;
}

namespace {

struct SlotDraw {
  uint8_t camera;
  AugmentSpec spec;
};

SlotDraw draw_slot(Rng& rng, const AugmentConfig& cfg, size_t n_cameras,
                   const std::vector<double>& cum_weights) {
  SlotDraw d;
  const double u = rng.uniform01() * cum_weights.back();
  size_t cam = 0;
  while (cam + 1 < n_cameras && u >= cum_weights[cam]) ++cam;
  d.camera = static_cast<uint8_t>(cam);
  d.spec.shift_right_m = rng.uniform(-cfg.shift_range_m, cfg.shift_range_m);
  d.spec.yaw_rad = rng.uniform(-cfg.yaw_range_rad, cfg.yaw_range_rad);
  return d;
}

}  // namespace

StoreBuildSummary build_store(const std::vector<const Recording*>& recordings,
                              const AugmentConfig& cfg, const std::filesystem::path& out_path) {
  if (recordings.empty()) throw ConfigError("build_store: no recordings");
  if (cfg.samples_per_frame <= 0) throw ConfigError("build_store: samples_per_frame must be > 0");
  if (!(cfg.min_patch_validity >= 0 && cfg.min_patch_validity <= 1))
    throw ConfigError("build_store: min_patch_validity must be in [0, 1]");

  const size_t n_cameras = recordings[0]->rig().cameras.size();
  for (const Recording* r : recordings)
    if (r->rig().cameras.size() != n_cameras)
      throw ConfigError("build_store: recordings disagree on rig size");
  std::vector<double> weights = cfg.camera_weights;
  if (weights.empty()) weights.assign(n_cameras, 1.0);
  if (weights.size() != n_cameras)
    throw ConfigError("build_store: camera_weights size does not match the rig");
  std::vector<double> cum;
  double total = 0;
  for (double w : weights) {
    if (w < 0) throw ConfigError("build_store: camera weights must be non-negative");
    total += w;
    cum.push_back(total);
  }
  if (total <= 0) throw ConfigError("build_store: camera weights sum to zero");

  StoreHeader header;
  header.patch_w = static_cast<uint32_t>(cfg.patch.out_w);
  header.patch_h = static_cast<uint32_t>(cfg.patch.out_h);
  header.patch_c = static_cast<uint32_t>(cfg.patch.channels_hint);
  header.label_dim = cfg.label_kind == LabelKind::y_only ? kLabelPointCount : 3 * kLabelPointCount;
  header.label_kind = cfg.label_kind;
  header.seed = cfg.seed;
  for (const Recording* r : recordings) header.recording_ids.push_back(r->id());

  // Slot table: samples_per_frame slots per recorded tick, shuffled into the
  // write order up front so generation streams straight to disk.
  std::vector<uint64_t> rec_offset(recordings.size() + 1, 0);
  for (size_t r = 0; r < recordings.size(); ++r)
    rec_offset[r + 1] = rec_offset[r] + recordings[r]->ticks().size() *
                                            static_cast<uint64_t>(cfg.samples_per_frame);
  const uint64_t total_slots = rec_offset.back();
  const std::vector<uint64_t> order =
      random_permutation(total_slots, mix_seed(cfg.seed, 0x6f72646572ull));

  StoreWriter writer(out_path, header);
  constexpr int kMaxAttempts = 20;
  uint64_t attempts = 0;
  for (uint64_t slot_global : order) {
    size_t r = 0;
    while (slot_global >= rec_offset[r + 1]) ++r;
    const uint64_t local = slot_global - rec_offset[r];
    const uint32_t tick = static_cast<uint32_t>(local / cfg.samples_per_frame);
    const uint32_t slot = static_cast<uint32_t>(local % cfg.samples_per_frame);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      ++attempts;
      Rng rng(mix_seed(cfg.seed, r, tick, slot * 32ull + static_cast<uint64_t>(attempt)));
      const SlotDraw d = draw_slot(rng, cfg, n_cameras, cum);
      auto sample = make_sample(*recordings[r], static_cast<uint32_t>(r), tick, d.camera,
                                d.spec, cfg);
      if (sample) {
        writer.append(*sample);
        break;
      }
    }
  }
  writer.finalize();

  StoreBuildSummary summary;
  summary.records = writer.written();
  summary.attempts = attempts;
  summary.rejection_rate = attempts == 0 ? 0.0 : 1.0 - double(summary.records) / double(attempts);
  if (summary.rejection_rate > 0.5)
    throw RuntimeError("build_store: rejection rate above 50%; reduce the perturbation "
                       "ranges or the validity threshold");
  return summary;
}

}  // namespace lanesim
