#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "sb/transport.hpp"

namespace sb {

struct DetectorConfig {
  double zero_threshold = 0.02;   // conductance "zero" gate, e^2/h
  double unit_threshold = 0.90;   // resonant maximum gate
  double max_width = 0.01;        // reject broader (non-Fano) structure, k_F units
  double pair_gap = 2e-2;         // max unit-to-unit distance when pairing
  int min_samples = 3;            // zero/unit separation below this flags re-refinement
};

/// One narrow feature: conductance unit (peak) plus adjacent zero.
struct FanoResonance {
  double k_unit = 0.0;
  double k_zero = 0.0;
  double width = 0.0;             // |k_unit - k_zero|
  int orientation = 0;            // sign(k_zero - k_unit)
  int pair_id = -1;               // index of the partner resonance, -1 if single
  bool under_resolved = false;
  double g_unit = 0.0;
  double g_zero = 0.0;
};

std::vector<FanoResonance> detect(const ConductanceTrace& trace, const DetectorConfig& cfg);

struct TrackPoint {
  double coupling = 0.0;
  double k_unit = 0.0;
  double k_zero = 0.0;
  double width = 0.0;
  bool collapsed = false;         // width below scan resolution
  bool lost = false;              // no resonance found in the window
};

struct TrackConfig {
  double window_halfwidth = 2e-3; // initial search half-window around the seed
  double min_step = 1e-9;
  int coarse_points = 160;        // funnel-search grid per window
  int fine_points = 48;           // per flank when bracketing zero/unit
  DetectorConfig detector;
  IncidentSpec incident;
};

/// Follow one resonance across couplings: rescans a warm-started local
/// window per coupling value and re-detects. params.soi.coupling is
/// overridden by each entry of couplings.
std::vector<TrackPoint> track_vs_coupling(double seed_k, double seed_width,
                                          const std::vector<double>& couplings,
                                          const ModelParams& params,
                                          const DiscretizationConfig& disc,
                                          const TrackConfig& cfg);

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;         // log-log intercept
  double rms_residual = 0.0;      // in log space
  std::vector<std::pair<double, double>> points;  // (coupling, width)
};

/// Ordinary least squares on (log coupling, log width); needs >= 3 strictly
/// positive points.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

void write_resonance_csv(std::ostream& os, const std::vector<FanoResonance>& list,
                         double coupling);
void write_tracking_csv(std::ostream& os, const std::vector<TrackPoint>& track,
                        int resonance_id);
void write_fit_report(std::ostream& os, const PowerLawFit& fit);

}  // namespace sb
