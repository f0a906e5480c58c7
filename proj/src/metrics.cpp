#include "lanesim/metrics.hpp"

#include <fstream>
#include <sstream>

namespace lanesim {
namespace {

double rms(const std::vector<double>& v) {
  if (v.empty()) throw ConfigError("rms: empty series");
  double acc = 0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

MdbfResult mdbf(const ResimReport& report) {
  if (!(report.distance_m > 0)) throw ConfigError("mdbf: no distance driven");
  MdbfResult r;
  if (report.failures.empty()) {
    r.infinite = true;
    return r;
  }
  r.km = report.distance_m / 1000.0 / static_cast<double>(report.failures.size());
  return r;
}

double lateral_precision_pct(const std::vector<double>& offsets_m) {
  return 100.0 * (1.0 - rms(offsets_m));
}

double comfort_score(const std::vector<double>& lateral_accel, double dt_s, double k) {
  if (lateral_accel.size() < 2) throw ConfigError("comfort_score: need at least 2 samples");
  if (dt_s <= 0) throw ConfigError("comfort_score: dt must be positive");
  const size_t n = lateral_accel.size();
  std::vector<double> jerk(n);
  jerk[0] = (lateral_accel[1] - lateral_accel[0]) / dt_s;
  for (size_t i = 1; i + 1 < n; ++i)
    jerk[i] = (lateral_accel[i + 1] - lateral_accel[i - 1]) / (2.0 * dt_s);
  jerk[n - 1] = (lateral_accel[n - 1] - lateral_accel[n - 2]) / dt_s;
  return 100.0 - k * rms(jerk);
}

double mapa_score_pct(const MapaInputs& m) {
  if (m.y_hl == 0 || m.y_hr == 0)
    throw ConfigError("mapa_score: human bias must be nonzero in both runs");
  const double avg = (m.y_l + m.y_r) / 2.0;
  return 50.0 * std::abs((m.y_l - avg) / m.y_hl + (m.y_r - avg) / m.y_hr);
}

std::vector<double> offset_series(const ResimReport& report) {
  std::vector<double> out;
  out.reserve(report.steps.size());
  for (const auto& s : report.steps)
    if (!s.in_cooldown) out.push_back(s.lateral_offset);
  return out;
}

double mean_lateral_offset(const ResimReport& report) {
  double num = 0, den = 0;
  for (const auto& s : report.steps) {
    if (s.in_cooldown) continue;
    const double w = s.speed * report.dt_s;  // arc length of the step
    num += w * s.lateral_offset;
    den += w;
  }
  if (den <= 0) throw RuntimeError("mean_lateral_offset: no driven arc outside cooldown");
  return num / den;
}

MetricSummary summarize(const ResimReport& report, double comfort_k) {
  MetricSummary s;
  s.recording_id = report.recording_id;
  s.policy_name = report.policy_name;
  s.config_hash = report.config_hash;
  s.distance_km = report.distance_m / 1000.0;
  s.failures_total = report.failures.size();
  s.failures_boundary = report.failure_count(FailureCause::boundary_touch);
  s.failures_warp = report.failure_count(FailureCause::warp_invalid);
  s.mdbf = mdbf(report);
  s.precision_pct = lateral_precision_pct(offset_series(report));
  std::vector<double> accel;
  accel.reserve(report.steps.size());
  for (const auto& st : report.steps) accel.push_back(st.lateral_accel);
  s.comfort = comfort_score(accel, report.dt_s, comfort_k);
  return s;
}

std::string summary_text(const MetricSummary& s) {
  std::ostringstream os;
  os << "lanesim_metric_summary v1\n";
  os << "recording " << s.recording_id << "\n";
  os << "policy " << s.policy_name << "\n";
  os << "config_hash " << to_hex16(s.config_hash) << "\n";
  os << "distance_km " << format_double(s.distance_km) << "\n";
  os << "failures_total " << s.failures_total << "\n";
  os << "failures_boundary_touch " << s.failures_boundary << "\n";
  os << "failures_warp_invalid " << s.failures_warp << "\n";
  os << "mdbf_km " << (s.mdbf.infinite ? std::string("inf") : format_double(s.mdbf.km)) << "\n";
  os << "precision_pct " << format_double(s.precision_pct) << "\n";
  os << "comfort_score " << format_double(s.comfort) << "\n";
  if (s.has_mapa) os << "mapa_pct " << format_double(s.mapa_pct) << "\n";
  os << "end\n";
  return os.str();
}

void write_series_csv(const ResimReport& report, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeError("write_series_csv: cannot open " + path.string());
  os << "t_s,station_m,speed_mps,lateral_offset_m,lateral_accel_mps2,steering_rad,"
        "pred_y10_m,pred_y50_m,in_cooldown\n";
  for (const auto& s : report.steps)
    os << format_double(s.t) << "," << format_double(s.station_s) << ","
       << format_double(s.speed) << "," << format_double(s.lateral_offset) << ","
       << format_double(s.lateral_accel) << "," << format_double(s.steering) << ","
       << format_double(s.pred_y10) << "," << format_double(s.pred_y50) << ","
       << (s.in_cooldown ? 1 : 0) << "\n";
  os.close();
  if (!os) throw RuntimeError("write_series_csv: write failed for " + path.string());
}

}  // namespace lanesim
