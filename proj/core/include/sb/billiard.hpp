#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "sb/channel.hpp"

namespace sb {

enum class LeastSquaresMethod { ColPivQR, SVD };

/// Collocation / truncation controls. Counts left at 0 (or negative) are
/// resolved from the energy: resolve() freezes them so a whole scan runs at
/// one fixed discretization.
struct DiscretizationConfig {
  int n_theta = 0;                        // interior quadrature angles (even); 0 = auto
  int theta_margin = 45;                  // extra angular momenta beyond k*R in auto mode
  double wall_points_per_wavelength = 10.0;
  int min_wall_points = 220;
  int wall_points = 0;                    // 0 = auto from points-per-wavelength
  int mouth_points = 16;                  // matching ordinates per lead
  int n_evanescent = -1;                  // per lead; -1 = n_basis - #propagating
  double svd_cutoff = 1e-12;              // relative rank cutoff
  LeastSquaresMethod method = LeastSquaresMethod::ColPivQR;
  double derivative_weight = 0.0;         // weight of d/dx rows; 0 = auto 1/k_minus
  double flux_tol = 1e-6;
  double wall_tol = 1e-6;
  int check_point_factor = 2;             // density of the independent residual set
  bool corner_refine = true;              // cluster wall points toward mouth corners

  void validate() const;
  /// Copy with all automatic counts frozen for energies up to k_fermi^2/2.
  DiscretizationConfig resolved(const ModelParams& params, double k_fermi) const;
};

/// Circle of radius R with two diametral lead openings of width d at
/// x = -+q, q = sqrt(R^2 - d^2/4). Collocation points are symmetric under
/// y -> -y and x -> -x so discrete solutions inherit the mirror symmetries.
struct BilliardGeometry {
  double R = 0.0, d = 0.0, q = 0.0;
  std::vector<Eigen::Vector2d> wall_points;
  std::vector<double> wall_weights;            // arc element per point
  std::vector<Eigen::Vector2d> wall_check_points;  // independent, finer
  std::vector<double> mouth_y;                 // matching ordinates (each lead)
  std::vector<double> mouth_weights;
  std::vector<double> mouth_check_y;
};

BilliardGeometry build_geometry(const ModelParams& params, const DiscretizationConfig& disc);

/// Interior plane-wave basis at energy E: equidistant angles, branch
/// wavenumbers k_pm from the free SOI dispersion, branch spinors from
/// freespace::interior_spinor.
struct InteriorBasis {
  double energy = 0.0;
  double k_plus = 0.0, k_minus = 0.0;
  std::vector<double> thetas;
  std::vector<Spinor2> chi_plus, chi_minus;
};

InteriorBasis build_interior_basis(double energy, const Soi& soi, int n_theta);

/// Which flux-normalized propagating mode enters, and from which lead.
/// mode_index 0 = k1 (larger |k|), 1 = k2.
struct IncidentSpec {
  int lead = 1;
  int mode_index = 0;
};

struct AssembledSystem {
  Eigen::MatrixXcd a;
  Eigen::VectorXcd rhs;
  int n_theta = 0;        // columns [0, n_theta) = c(theta_j), then d(theta_j)
  int lead1_offset = 0;   // outgoing lead-1 block: propagating then evanescent
  int lead1_prop = 0;
  int lead1_evan = 0;
  int lead2_offset = 0;
  int lead2_prop = 0;
  int lead2_evan = 0;
  double incident_amplitude = 0.0;  // peak |profile| of the incident mode
};

AssembledSystem assemble_system(double energy, const BilliardGeometry& geom,
                                const InteriorBasis& basis, const ModeSet& modes,
                                const ModelParams& params, const DiscretizationConfig& disc,
                                const IncidentSpec& incident);

struct ScatteringSolution {
  double energy = 0.0;
  double k_fermi = 0.0;  // sqrt(2E)
  double R = 0.0, d = 0.0, q = 0.0;  // geometry snapshot
  IncidentSpec incident;
  Complex c1, c2, c3, c4;                  // flux-normalized lead amplitudes
  Eigen::VectorXcd lead1_evanescent, lead2_evanescent;
  Eigen::VectorXcd interior_c, interior_d; // quadrature-absorbed c(theta_j), d(theta_j)
  InteriorBasis basis;
  ModeSet modes;
  double wall_residual = 0.0;      // rms |psi| on the check set / incident amplitude
  double wall_residual_max = 0.0;
  double mouth_residual = 0.0;     // rms matching mismatch on check ordinates
  double flux_defect = 0.0;        // |1 - sum |c_i|^2|
  double pivot_ratio = 0.0;        // smallest retained pivot / largest
  double funnel_indicator = 0.0;   // smallest pivot overall / largest (quasi-bound dip)
  double interior_norm = 0.0;      // ||(c, d)||_2, resonant-excitation indicator
  int rank = 0;
  bool converged = false;
};

ScatteringSolution solve_scattering(double energy, const ModelParams& params,
                                    const DiscretizationConfig& disc,
                                    const IncidentSpec& incident = {});

/// Landauer conductance G = sum of transmitted |c|^2 in units of e^2/h
/// (|c1|^2 + |c2|^2 for lead-1 incidence). Rejects unconverged solutions.
double conductance(const ScatteringSolution& sol);

/// Transmitted/reflected probability without the convergence gate.
double transmitted_probability(const ScatteringSolution& sol);

/// Eq.-style interior superposition at a point strictly inside the circle.
Spinor2 interior_wavefunction(const ScatteringSolution& sol, double x, double y);

/// s_i = (1/2) psi^dag sigma_i psi of an arbitrary spinor value.
SpinDensity spin_density(const Spinor2& psi);

/// Piecewise evaluation of the full scattering state: interior expansion in
/// the disk, mode sums (incident + outgoing) in the lead strips.
class ScatteringField {
 public:
  ScatteringField(const ScatteringSolution& sol, const ModelParams& params);

  bool inside(double x, double y) const;
  Spinor2 at(double x, double y) const;  // throws outside the domain

 private:
  const ScatteringSolution& sol_;
  double R_, d_, q_;
};

/// Rank-revealing least squares with a relative cutoff; factorization per
/// DiscretizationConfig::method.
struct LeastSquaresInfo {
  int rank = 0;
  double pivot_ratio = 0.0;      // retained range
  double smallest_ratio = 0.0;   // including below-cutoff pivots
};
Eigen::VectorXcd least_squares_solve(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b,
                                     LeastSquaresMethod method, double rel_cutoff,
                                     LeastSquaresInfo* info = nullptr);

/// Solution dump with amplitudes, residuals and discretization metadata.
void write_solution_dump(std::ostream& os, const ScatteringSolution& sol,
                         const ModelParams& params, const DiscretizationConfig& disc);

}  // namespace sb
