#pragma once

#include "lanesim/resim.hpp"

namespace lanesim {

struct MdbfResult {
  bool infinite = false;  // zero failures
  double km = 0;          // meaningful only when not infinite
};

// Distance driven divided by failure count.
MdbfResult mdbf(const ResimReport& report);

// 100 * (1 m - RMS offset) / 1 m; negative when RMS exceeds 1 m.
double lateral_precision_pct(const std::vector<double>& offsets_m);

// 100 - k * RMS(jerk), jerk by central differences (one-sided at the ends);
// constant acceleration scores exactly 100.
double comfort_score(const std::vector<double>& lateral_accel, double dt_s, double k = 20.0);

struct MapaInputs {
  double y_l = 0;   // policy mean lateral offset, left-biased run (left positive)
  double y_r = 0;   // policy mean lateral offset, right-biased run
  double y_hl = 0;  // human mean offset in the left-biased recording
  double y_hr = 0;  // human mean offset in the right-biased recording
};

// 0.5 * |(y_l - avg)/y_hl + (y_r - avg)/y_hr| * 100 with avg = (y_l + y_r)/2.
// Invariant under adding a common constant to y_l and y_r.
double mapa_score_pct(const MapaInputs& m);

// Per-step series with reset-cooldown segments excluded (teleports are not
// driving); weights are the per-step arc lengths for arc-weighted means.
std::vector<double> offset_series(const ResimReport& report);
double mean_lateral_offset(const ResimReport& report);

struct MetricSummary {
  std::string recording_id;
  std::string policy_name;
  uint64_t config_hash = 0;
  double distance_km = 0;
  size_t failures_total = 0;
  size_t failures_boundary = 0;
  size_t failures_warp = 0;
  MdbfResult mdbf;
  double precision_pct = 0;
  double comfort = 0;
  bool has_mapa = false;
  double mapa_pct = 0;
};

MetricSummary summarize(const ResimReport& report, double comfort_k = 20.0);

std::string summary_text(const MetricSummary& s);

// Per-step time series for external plotting.
void write_series_csv(const ResimReport& report, const std::filesystem::path& path);

}  // namespace lanesim
