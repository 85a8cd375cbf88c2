#include "sb/freespace.hpp"

#include <cmath>

namespace sb {

namespace {
constexpr Complex kI{0.0, 1.0};

void check_branch(int branch) {
  if (branch != 1 && branch != -1)
    throw std::invalid_argument("branch must be +1 or -1");
}
}  // namespace

double free_dispersion(double k, int branch, const Soi& soi) {
  soi.validate();
  check_branch(branch);
  if (!(k >= 0.0)) throw std::invalid_argument("free_dispersion: k must be >= 0");
  return 0.5 * k * k + branch * soi.coupling * k;
}

FermiRadii fermi_radii(double energy, const Soi& soi) {
  soi.validate();
  const double beta = soi.coupling;
  const double radicand = 2.0 * energy + beta * beta;
  if (radicand < 0.0)
    throw std::domain_error("fermi_radii: 2E + beta^2 < 0, no constant-energy circles");
  const double s = std::sqrt(radicand);
  return {s - beta, s + beta};
}

double spin_phase(double kx, double ky) {
  if (kx == 0.0 && ky == 0.0)
    throw std::domain_error("spin_phase: undefined at k = 0");
  double phi = std::atan2(-ky, kx);
  if (phi <= -M_PI) phi += 2.0 * M_PI;  // atan2(-0, x<0) yields -pi
  return phi;
}

Spinor2 interior_spinor(double theta, int branch, const Soi& soi) {
  soi.validate();
  check_branch(branch);
  if (!std::isfinite(theta)) throw std::invalid_argument("interior_spinor: theta must be finite");
  Complex lower;
  if (soi.kind == SoiKind::Dresselhaus) {
    lower = std::exp(-kI * theta);
  } else {
    lower = -kI * std::exp(kI * theta);
  }
  return {Complex{1.0, 0.0}, static_cast<double>(branch) * lower};
}

Eigen::Matrix2cd free_soi_matrix(double kx, double ky, const Soi& soi) {
  soi.validate();
  const double k2 = kx * kx + ky * ky;
  Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
  h(0, 0) = h(1, 1) = 0.5 * k2;
  // sigma_x p - i-tricks written out: sigma_x has 1 off-diagonal,
  // sigma_y has -i (up,down) and +i (down,up).
  if (soi.kind == SoiKind::Dresselhaus) {
    // beta (sigma_x kx - sigma_y ky)
    h(0, 1) += soi.coupling * (kx + kI * ky);
    h(1, 0) += soi.coupling * (kx - kI * ky);
  } else {
    // alpha (sigma_x ky - sigma_y kx)
    h(0, 1) += soi.coupling * (ky + kI * kx);
    h(1, 0) += soi.coupling * (ky - kI * kx);
  }
  return h;
}

}  // namespace sb
