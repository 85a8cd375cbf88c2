#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sb/billiard.hpp"

namespace sb {

struct FocusWindow {
  double k_lo = 0.0;
  double k_hi = 0.0;
  double step = 0.0;
};

struct ScanConfig {
  double kf_min = 0.0;
  double kf_max = 0.0;
  double base_step = 1e-3;
  double refine_threshold = 0.05;  // |dG| between neighbors triggering bisection
  double min_step = 1e-9;
  int max_points = 200000;
  std::vector<FocusWindow> focus;  // extra pre-refined windows
  bool preflight = true;           // discretization-doubling probe at 3 energies
  double preflight_tol = 1e-6;
  bool escalate_unconverged = true;
  int threads = 0;                 // 0 = hardware concurrency
  IncidentSpec incident;

  void validate() const;
};

struct TraceSample {
  double k_fermi = 0.0;
  double conductance = 0.0;
  bool converged = false;
  double wall_residual = 0.0;
  double flux_defect = 0.0;
  double c2_abs = 0.0;             // spin-flip transmission magnitude
  double c3_abs = 0.0;             // spin-flip reflection magnitude
  double interior_norm = 0.0;
  double funnel_indicator = 0.0;
};

struct ConductanceTrace {
  ModelParams params;
  DiscretizationConfig disc;       // resolved counts actually used
  std::vector<TraceSample> samples;            // strictly increasing k_fermi
  std::vector<std::string> refinement_log;
};

/// G(k_F) over [kf_min, kf_max]: uniform base grid, then recursive bisection
/// of neighbor gaps with |dG| above the threshold, down to min_step or the
/// point budget. Discretization is frozen at kf_max for the whole scan.
ConductanceTrace scan(const ScanConfig& cfg, const ModelParams& params,
                      const DiscretizationConfig& disc);

/// Resume a partial trace: existing samples are kept, refinement continues.
ConductanceTrace scan_resume(const ScanConfig& cfg, const ModelParams& params,
                             const DiscretizationConfig& disc, ConductanceTrace existing);

/// Delta E_F = k_F * dk_F (hbar = m = 1).
double energy_width_from_k(double k_fermi, double dk_fermi);

/// Candidate quasi-bound-state positions: minima of the solver's smallest
/// rank-revealing pivot (and spikes of the interior norm) refined by local
/// search. These funnels mark trapped modes; at small SOI coupling the
/// narrow conductance resonances sit inside them.
struct QuasiBoundCandidate {
  double k_fermi = 0.0;
  double indicator = 0.0;   // funnel depth at the minimum
  double interior_norm = 0.0;
};
std::vector<QuasiBoundCandidate> locate_quasibound(double kf_lo, double kf_hi,
                                                   double coarse_step,
                                                   const ModelParams& params,
                                                   const DiscretizationConfig& disc,
                                                   int max_candidates = 8);

void write_trace_csv(std::ostream& os, const ConductanceTrace& trace);
ConductanceTrace read_trace_csv(std::istream& is, const ModelParams& params,
                                const DiscretizationConfig& disc);

}  // namespace sb
