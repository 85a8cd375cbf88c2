#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Core>

namespace sb {

using Complex = std::complex<double>;

enum class SoiKind { Dresselhaus, Rashba };

/// Spin-orbit interaction: kind plus dimensionless coupling (beta or alpha,
/// in units of hbar^2 / (m l0)).
struct Soi {
  SoiKind kind = SoiKind::Dresselhaus;
  double coupling = 0.0;

  void validate() const {
    if (!(coupling >= 0.0)) throw std::invalid_argument("Soi: coupling must be >= 0");
  }
};

struct Spinor2 {
  Complex up{0.0, 0.0};
  Complex down{0.0, 0.0};

  double norm2() const { return std::norm(up) + std::norm(down); }
};

/// E_lambda(k) = k^2/2 + lambda * coupling * k, lambda = +-1. k >= 0.
double free_dispersion(double k, int branch, const Soi& soi);

/// Constant-energy circle radii, k_pm = sqrt(2E + beta^2) -+ beta.
/// Defined for 2E + beta^2 >= 0; k_minus - k_plus = 2*beta by construction.
struct FermiRadii {
  double k_plus;
  double k_minus;
};
FermiRadii fermi_radii(double energy, const Soi& soi);

/// phi(k) = arg(k_x - i k_y), in (-pi, pi].
double spin_phase(double kx, double ky);

/// Spinor of the interior plane wave traveling along (cos theta, sin theta).
/// Dresselhaus: (1, branch * e^{-i theta}); Rashba replaces e^{-i theta} by
/// -i e^{i theta}. Branch +1 pairs with k_plus, -1 with k_minus: each plane
/// wave is then an exact eigenstate of the free SOI Hamiltonian.
Spinor2 interior_spinor(double theta, int branch, const Soi& soi);

/// Free-particle Hamiltonian at wave vector (kx, ky): k^2/2 + SOI term,
/// as a 2x2 matrix in the {up, down} basis.
Eigen::Matrix2cd free_soi_matrix(double kx, double ky, const Soi& soi);

}  // namespace sb
