#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sb/freespace.hpp"

namespace sb {

/// Dimensionless model parameters; the single source of truth for a run.
struct ModelParams {
  double d = 1.0;   // channel width
  double R = 15.0;  // billiard radius, must exceed d/2
  Soi soi;
  int n_basis = 14; // transverse sine-basis truncation

  void validate() const;
};

/// phi_n(y) = sqrt(2/d) sin(pi n (y + d/2)/d), n >= 1, |y| <= d/2.
double transverse_basis(int n, double y, double d);

/// D_nm = <phi_n | d/dy | phi_m>: real antisymmetric, 4nm/(d(n^2-m^2)) for
/// n+m odd, zero otherwise. p_y = -i D.
Eigen::MatrixXd transverse_derivative_matrix(int n_basis, double d);

/// Coefficient of k in H(k): Dresselhaus beta * sigma_x, Rashba -alpha * sigma_y
/// (times identity in the transverse index). Size 2*n_basis.
Eigen::MatrixXcd soi_longitudinal_matrix(const ModelParams& params);

/// k-independent part: transverse kinetic energy plus the p_y SOI term.
Eigen::MatrixXcd channel_static_matrix(const ModelParams& params);

/// Channel Hamiltonian at longitudinal wavenumber kx in the product basis
/// {phi_n} x {up, down}, index i = 2(n-1) + s. Hermitian for real kx.
Eigen::MatrixXcd hamiltonian_at_k(double kx, const ModelParams& params);

/// One lead eigenstate at fixed energy. Propagating modes are normalized to
/// unit longitudinal probability flux; evanescent modes to unit profile norm.
struct ChannelMode {
  Complex k{0.0, 0.0};
  double energy = 0.0;
  Eigen::VectorXcd up;    // a_n expansion coefficients
  Eigen::VectorXcd down;  // b_n expansion coefficients
  double velocity = 0.0;  // group velocity dE/dk, propagating only
  double flux_norm = 0.0; // |flux| after normalization (1 for propagating)
  bool propagating = false;
  double residual = 0.0;  // ||(H(k)-E)v|| / ||v||

  Spinor2 profile(double y, double d) const;        // (a(y), b(y))
  Spinor2 evaluate(double x, double y, double d) const;  // e^{ikx} profile
};

/// All modes of one lead cross-section at a given energy, split by direction.
/// Propagating lists are sorted by |Re k| descending (k1 before k2); at exact
/// spin degeneracy the pair is rotated to pure-spin combinations, up first.
/// Evanescent lists are sorted by |Im k| ascending (slowest decay first).
struct ModeSet {
  double energy = 0.0;
  std::vector<ChannelMode> right_propagating;  // Re k > 0, v > 0
  std::vector<ChannelMode> left_propagating;   // v < 0
  std::vector<ChannelMode> right_evanescent;   // Im k > 0, decay as x -> +inf
  std::vector<ChannelMode> left_evanescent;    // Im k < 0, decay as x -> -inf
};

/// Fixed-energy mode solve via linearization of the quadratic eigenproblem
/// in k (companion form of dimension 4*n_basis). n_evanescent < 0 keeps
/// n_basis - #propagating evanescent modes per direction.
ModeSet modes_at_energy(double energy, const ModelParams& params, int n_evanescent = -1);

/// Hellmann-Feynman group velocity <v|dH/dk|v>/<v|v>. Propagating input only.
double group_velocity(const ChannelMode& mode, const ModelParams& params);

struct SpinDensity {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  double probability = 0.0;  // |psi|^2
};

/// s_i(x, y) = (1/2) psi^dag sigma_i psi for the full mode wavefunction.
SpinDensity channel_spin_density(const ChannelMode& mode, double x, double y, double d);

struct DispersionBranch {
  int transverse_index = 0;  // dominant phi_n component
  int split_label = 0;       // +-1 spin-split label, 0 if degenerate
  bool ambiguous = false;    // stitching was uncertain at a near-degeneracy
  std::vector<std::pair<double, double>> samples;  // (k, E), sorted by k
};

/// Eigenvalue curves E_j(kx) stitched into continuous branches by
/// eigenvector overlap between adjacent grid points.
std::vector<DispersionBranch> dispersion(double kx_min, double kx_max, int n_samples,
                                         const ModelParams& params);

/// Band-structure export: one row (branch_id, k, E) per sample.
void write_band_csv(std::ostream& os, const std::vector<DispersionBranch>& branches);

}  // namespace sb
