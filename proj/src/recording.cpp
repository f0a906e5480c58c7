#include "lanesim/recording.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace lanesim {

size_t CameraRig::index_of(const std::string& name) const {
  for (size_t i = 0; i < cameras.size(); ++i)
    if (cameras[i].name == name) return i;
  throw ConfigError("CameraRig: no camera named '" + name + "'");
}

CameraRig standard_rig() {
  CameraRig rig;
  rig.intrinsics = standard_intrinsics();
  RigCamera center{"center", standard_camera_mount()};
  RigCamera left{"left", standard_camera_mount()};
  left.mount.position.y() = 0.5;  // vehicle y is left-positive
  RigCamera right{"right", standard_camera_mount()};
  right.mount.position.y() = -0.5;
  rig.cameras = {center, left, right};
  return rig;
}

namespace {

void write_polyline(std::ostream& os, const char* name, const ArcPolyline& poly) {
  os << name << " " << poly.size() << "\n";
  for (const auto& p : poly.points())
    os << format_double(p.x()) << " " << format_double(p.y()) << "\n";
}

ArcPolyline read_polyline(std::istream& is, const std::string& expect_name) {
  std::string name;
  size_t n = 0;
  is >> name >> n;
  if (name != expect_name || n < 2)
    throw RuntimeError("Recording: bad polyline section '" + name + "'");
  std::vector<Eigen::Vector2d> pts(n);
  for (size_t i = 0; i < n; ++i) is >> pts[i].x() >> pts[i].y();
  if (!is) throw RuntimeError("Recording: truncated polyline " + expect_name);
  return ArcPolyline(std::move(pts));
}

}  // namespace

std::filesystem::path Recording::frame_path(size_t tick, size_t camera) const {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "t%06zu_c%zu.ppm", tick, camera);
  return dir_ / "frames" / buf;
}

Recording Recording::record(const WorldScene& scene, const EgoTrace& trace,
                            const CameraRig& rig, double frame_rate_hz,
                            const std::filesystem::path& dir, const std::string& id,
                            uint64_t config_hash) {
  if (trace.samples.size() < 2) throw ConfigError("record: trace too short");
  if (frame_rate_hz <= 0) throw ConfigError("record: frame rate must be positive");
  if (id.empty() || id.find_first_of(" \t\n") != std::string::npos)
    throw ConfigError("record: id must be non-empty without whitespace");
  const double frame_dt = 1.0 / frame_rate_hz;
  const double stride_f = frame_dt / trace.dt;
  const auto stride = static_cast<size_t>(std::llround(stride_f));
  if (stride < 1 || std::fabs(stride * trace.dt - frame_dt) > 1e-9)
    throw ConfigError("record: frame interval must be an integer multiple of the trace dt");

  Recording rec;
  rec.dir_ = dir;
  rec.id_ = id;
  rec.config_hash_ = config_hash;
  rec.frame_rate_hz_ = frame_rate_hz;
  rec.rig_ = rig;
  rec.centerline_ = scene.centerline;
  rec.left_boundary_ = scene.left_boundary;
  rec.right_boundary_ = scene.right_boundary;

  std::vector<Eigen::Vector2d> human_pts(trace.samples.size());
  for (size_t i = 0; i < trace.samples.size(); ++i)
    human_pts[i] = trace.samples[i].pose.position();
  rec.human_path_ = ArcPolyline(std::move(human_pts));

  for (size_t i = 0; i < trace.samples.size(); i += stride) {
    RecordedTick tk;
    tk.t = trace.samples[i].t;
    tk.pose = trace.samples[i].pose;
    tk.speed = trace.samples[i].speed;
    rec.ticks_.push_back(tk);
  }

  std::filesystem::create_directories(dir / "frames");
  for (size_t ti = 0; ti < rec.ticks_.size(); ++ti) {
    for (size_t ci = 0; ci < rig.cameras.size(); ++ci) {
      const CameraPose cam = camera_world_pose(rec.ticks_[ti].pose, rig.cameras[ci].mount);
      save_image(render_frame(scene, cam, rig.intrinsics), rec.frame_path(ti, ci));
    }
  }

  std::ofstream f(dir / "manifest.txt");
  if (!f) throw RuntimeError("record: cannot write manifest in " + dir.string());
  f << "lanesim_recording v1\n";
  f << "id " << id << "\n";
  f << "config_hash " << to_hex16(config_hash) << "\n";
  f << "frame_rate_hz " << format_double(frame_rate_hz) << "\n";
  f << "intrinsics " << format_double(rig.intrinsics.fx) << " " << format_double(rig.intrinsics.fy)
    << " " << format_double(rig.intrinsics.cx) << " " << format_double(rig.intrinsics.cy) << " "
    << rig.intrinsics.width << " " << rig.intrinsics.height << "\n";
  f << "cameras " << rig.cameras.size() << "\n";
  for (const auto& c : rig.cameras) {
    f << c.name << " " << format_double(c.mount.position.x()) << " "
      << format_double(c.mount.position.y()) << " " << format_double(c.mount.position.z()) << " "
      << format_double(c.mount.yaw) << " " << format_double(c.mount.pitch_down) << " "
      << format_double(c.mount.roll) << "\n";
  }
  write_polyline(f, "centerline", rec.centerline_);
  write_polyline(f, "left_boundary", rec.left_boundary_);
  write_polyline(f, "right_boundary", rec.right_boundary_);
  write_polyline(f, "human_path", rec.human_path_);
  f << "ticks " << rec.ticks_.size() << "\n";
  for (const auto& tk : rec.ticks_) {
    f << format_double(tk.t) << " " << format_double(tk.pose.x) << " " << format_double(tk.pose.y)
      << " " << format_double(tk.pose.psi) << " " << format_double(tk.speed) << "\n";
  }
  f << "end\n";
  if (!f) throw RuntimeError("record: manifest write failed");
  f.close();

  rec.finish_load();
  return rec;
}

Recording Recording::open(const std::filesystem::path& dir) {
  std::ifstream f(dir / "manifest.txt");
  if (!f) throw RuntimeError("Recording::open: no manifest in " + dir.string());
  Recording rec;
  rec.dir_ = dir;

  std::string word, version;
  f >> word >> version;
  if (word != "lanesim_recording" || version != "v1")
    throw RuntimeError("Recording::open: unrecognized manifest format");
  f >> word >> rec.id_;
  if (word != "id") throw RuntimeError("Recording::open: expected id");
  std::string hash_hex;
  f >> word >> hash_hex;
  if (word != "config_hash") throw RuntimeError("Recording::open: expected config_hash");
  rec.config_hash_ = std::strtoull(hash_hex.c_str(), nullptr, 16);
  f >> word >> rec.frame_rate_hz_;
  if (word != "frame_rate_hz") throw RuntimeError("Recording::open: expected frame_rate_hz");
  f >> word;
  if (word != "intrinsics") throw RuntimeError("Recording::open: expected intrinsics");
  f >> rec.rig_.intrinsics.fx >> rec.rig_.intrinsics.fy >> rec.rig_.intrinsics.cx >>
      rec.rig_.intrinsics.cy >> rec.rig_.intrinsics.width >> rec.rig_.intrinsics.height;
  size_t n_cams = 0;
  f >> word >> n_cams;
  if (word != "cameras" || n_cams == 0)
    throw RuntimeError("Recording::open: expected cameras");
  rec.rig_.cameras.resize(n_cams);
  for (auto& c : rec.rig_.cameras) {
    f >> c.name >> c.mount.position.x() >> c.mount.position.y() >> c.mount.position.z() >>
        c.mount.yaw >> c.mount.pitch_down >> c.mount.roll;
  }
  rec.centerline_ = read_polyline(f, "centerline");
  rec.left_boundary_ = read_polyline(f, "left_boundary");
  rec.right_boundary_ = read_polyline(f, "right_boundary");
  rec.human_path_ = read_polyline(f, "human_path");
  size_t n_ticks = 0;
  f >> word >> n_ticks;
  if (word != "ticks" || n_ticks == 0) throw RuntimeError("Recording::open: expected ticks");
  rec.ticks_.resize(n_ticks);
  for (auto& tk : rec.ticks_)
    f >> tk.t >> tk.pose.x >> tk.pose.y >> tk.pose.psi >> tk.speed;
  f >> word;
  if (!f || word != "end") throw RuntimeError("Recording::open: truncated manifest");

  rec.finish_load();
  return rec;
}

void Recording::finish_load() {
  tick_stations_.resize(ticks_.size());
  for (size_t i = 0; i < ticks_.size(); ++i)
    tick_stations_[i] = centerline_.project(ticks_[i].pose.position()).s;
}

ImageBuffer Recording::frame(size_t tick, size_t camera) const {
  if (tick >= ticks_.size() || camera >= rig_.cameras.size())
    throw RuntimeError("Recording::frame: index out of range");
  const uint64_t key = tick * 64 + camera;
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->index.find(key);
    if (it != cache_->index.end()) {
      cache_->entries.splice(cache_->entries.begin(), cache_->entries, it->second);
      return cache_->entries.front().second;
    }
  }
  ImageBuffer img = load_image(frame_path(tick, camera));
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    if (cache_->index.find(key) == cache_->index.end()) {
      cache_->entries.emplace_front(key, img);
      cache_->index[key] = cache_->entries.begin();
      if (cache_->entries.size() > kCacheCapacity) {
        cache_->index.erase(cache_->entries.back().first);
        cache_->entries.pop_back();
      }
    }
  }
  return img;
}

}  // namespace lanesim
