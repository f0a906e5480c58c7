#pragma once

#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "lanesim/image.hpp"
#include "lanesim/world.hpp"

namespace lanesim {

struct RigCamera {
  std::string name;
  CameraPose mount;  // vehicle frame
};

struct CameraRig {
  CameraIntrinsics intrinsics;
  std::vector<RigCamera> cameras;

  size_t index_of(const std::string& name) const;
};

// Three-camera rig around the standard camera: center at the standard mount,
// left/right displaced 0.5 m along vehicle +y/-y.
CameraRig standard_rig();

struct RecordedTick {
  double t = 0;
  Pose2 pose;
  double speed = 0;
};

// A recording on disk: `manifest.txt` (rig, ground-truth polylines, tick
// poses, config hash) plus one PPM per tick and camera under frames/.
// Frames are loaded lazily through a small LRU cache, so 10 km recordings
// never sit in memory.
class Recording {
 public:
  // Renders every rig camera at each frame tick and writes the directory.
  // frame_rate_hz must subdivide the trace: the frame interval must be an
  // integer multiple of the trace dt.
  static Recording record(const WorldScene& scene, const EgoTrace& trace,
                          const CameraRig& rig, double frame_rate_hz,
                          const std::filesystem::path& dir, const std::string& id,
                          uint64_t config_hash);

  static Recording open(const std::filesystem::path& dir);

  const std::string& id() const { return id_; }
  uint64_t config_hash() const { return config_hash_; }
  double frame_rate_hz() const { return frame_rate_hz_; }
  const CameraRig& rig() const { return rig_; }
  const std::vector<RecordedTick>& ticks() const { return ticks_; }
  const ArcPolyline& centerline() const { return centerline_; }
  const ArcPolyline& left_boundary() const { return left_boundary_; }
  const ArcPolyline& right_boundary() const { return right_boundary_; }
  const ArcPolyline& human_path() const { return human_path_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Station of each tick pose along the centerline (non-decreasing for
  // forward drives); used for nearest-frame lookup.
  const std::vector<double>& tick_stations() const { return tick_stations_; }

  ImageBuffer frame(size_t tick, size_t camera) const;

 private:
  Recording() = default;
  void finish_load();
  std::filesystem::path frame_path(size_t tick, size_t camera) const;

  std::filesystem::path dir_;
  std::string id_;
  uint64_t config_hash_ = 0;
  double frame_rate_hz_ = 0;
  CameraRig rig_;
  std::vector<RecordedTick> ticks_;
  ArcPolyline centerline_, left_boundary_, right_boundary_, human_path_;
  std::vector<double> tick_stations_;

  // Heap-held so Recording stays movable despite the mutex.
  struct FrameCache {
    std::mutex mutex;
    std::list<std::pair<uint64_t, ImageBuffer>> entries;  // front = newest
    std::map<uint64_t, std::list<std::pair<uint64_t, ImageBuffer>>::iterator> index;
  };
  std::unique_ptr<FrameCache> cache_ = std::make_unique<FrameCache>();
  static constexpr size_t kCacheCapacity = 24;
};

}  // namespace lanesim
