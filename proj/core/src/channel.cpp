#include "sb/channel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace sb {

namespace {

constexpr Complex kI{0.0, 1.0};

inline int iup(int n) { return 2 * (n - 1); }      // n is 1-based
inline int idown(int n) { return 2 * (n - 1) + 1; }

// Global phase making the largest-magnitude entry real positive.
void canonicalize_phase(Eigen::VectorXcd& v) {
  int imax = 0;
  double amax = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > amax) { amax = a; imax = i; }
  }
  if (amax == 0.0) return;
  v *= std::conj(v[imax]) / amax;
}

struct RawMode {
  Complex k;
  Eigen::VectorXcd v;  // interleaved (up, down) per transverse index
  double residual;
};

double mode_residual(const Complex& k, const Eigen::VectorXcd& v,
                     const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& c, double energy) {
  Eigen::VectorXcd r = (0.5 * k * k - energy) * v + k * (b * v) + c * v;
  return r.norm() / v.norm();
}

ChannelMode make_mode(const RawMode& raw, double energy, const Eigen::MatrixXcd& b,
                      double v_tol) {
  const int nb = static_cast<int>(raw.v.size()) / 2;
  ChannelMode m;
  m.k = raw.k;
  m.energy = energy;
  m.residual = raw.residual;

  Eigen::VectorXcd v = raw.v;
  const double im_tol = 1e-8 * std::max(1.0, std::abs(raw.k.real()));
  m.propagating = std::abs(raw.k.imag()) <= im_tol;
  if (m.propagating) {
    m.k = Complex{raw.k.real(), 0.0};
    const double norm2 = v.squaredNorm();
    const double vg = ((v.adjoint() * (raw.k.real() * v + b * v)).value().real()) / norm2;
    if (std::abs(vg) < v_tol)
      throw std::runtime_error("modes_at_energy: energy sits at a channel threshold (zero group velocity)");
    m.velocity = vg;
    v /= std::sqrt(std::abs(vg) * norm2);  // unit longitudinal flux
    m.flux_norm = 1.0;
  } else {
    v /= v.norm();
    m.flux_norm = 1.0;
  }
  canonicalize_phase(v);

  m.up.resize(nb);
  m.down.resize(nb);
  for (int n = 1; n <= nb; ++n) {
    m.up[n - 1] = v[iup(n)];
    m.down[n - 1] = v[idown(n)];
  }
  return m;
}

Eigen::VectorXcd stacked(const ChannelMode& m) {
  const int nb = static_cast<int>(m.up.size());
  Eigen::VectorXcd v(2 * nb);
  for (int n = 1; n <= nb; ++n) {
    v[iup(n)] = m.up[n - 1];
    v[idown(n)] = m.down[n - 1];
  }
  return v;
}

// Rotate an exactly spin-degenerate propagating pair to pure-spin
// combinations (the eigensolver returns an arbitrary mixture there).
void canonicalize_degenerate_pairs(std::vector<RawMode>& modes) {
  for (std::size_t i = 0; i + 1 < modes.size(); ++i) {
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      const double scale = 1.0 + std::abs(modes[i].k);
      if (std::abs(modes[i].k - modes[j].k) > 1e-10 * scale) continue;
      const int dim = static_cast<int>(modes[i].v.size());
      const int nb = dim / 2;
      Eigen::MatrixXcd pair(dim, 2);
      pair.col(0) = modes[i].v.normalized();
      pair.col(1) = modes[j].v.normalized();
      // Gram matrix of the spin-up projection; its eigenvectors give the
      // max/min up-weight combinations.
      Eigen::MatrixXcd up_block(nb, 2);
      for (int n = 1; n <= nb; ++n) up_block.row(n - 1) = pair.row(iup(n));
      Eigen::Matrix2cd gram = up_block.adjoint() * up_block;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(gram);
      Eigen::MatrixXcd rotated = pair * es.eigenvectors();
      // eigenvalues ascending: column 1 has the larger up weight
      modes[i].v = rotated.col(1);
      modes[j].v = rotated.col(0);
    }
  }
}

int dominant_transverse_index(const Eigen::VectorXcd& v) {
  const int nb = static_cast<int>(v.size()) / 2;
  int best = 1;
  double wbest = -1.0;
  for (int n = 1; n <= nb; ++n) {
    const double w = std::norm(v[iup(n)]) + std::norm(v[idown(n)]);
    if (w > wbest) { wbest = w; best = n; }
  }
  return best;
}

}  // namespace

void ModelParams::validate() const {
  soi.validate();
  if (!(d > 0.0)) throw std::invalid_argument("ModelParams: d must be > 0");
  if (!(R > 0.5 * d)) throw std::invalid_argument("ModelParams: R must exceed d/2");
  if (n_basis < 1) throw std::invalid_argument("ModelParams: n_basis must be >= 1");
}

double transverse_basis(int n, double y, double d) {
  if (n < 1) throw std::invalid_argument("transverse_basis: n must be >= 1");
  if (!(d > 0.0)) throw std::invalid_argument("transverse_basis: d must be > 0");
  if (std::abs(y) > 0.5 * d * (1.0 + 1e-12))
    throw std::out_of_range("transverse_basis: |y| > d/2");
  return std::sqrt(2.0 / d) * std::sin(M_PI * n * (y + 0.5 * d) / d);
}

Eigen::MatrixXd transverse_derivative_matrix(int n_basis, double d) {
  if (n_basis < 1) throw std::invalid_argument("transverse_derivative_matrix: n_basis >= 1");
  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(n_basis, n_basis);
  for (int n = 1; n <= n_basis; ++n)
    for (int m = 1; m <= n_basis; ++m) {
      if (((n + m) & 1) == 0) continue;  // nonzero only for n+m odd
      dm(n - 1, m - 1) = 4.0 * n * m / (d * (static_cast<double>(n) * n - static_cast<double>(m) * m));
    }
  return dm;
}

Eigen::MatrixXcd soi_longitudinal_matrix(const ModelParams& params) {
  params.validate();
  const int nb = params.n_basis;
  const double g = params.soi.coupling;
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2 * nb, 2 * nb);
  for (int n = 1; n <= nb; ++n) {
    if (params.soi.kind == SoiKind::Dresselhaus) {
      b(iup(n), idown(n)) = g;          // beta sigma_x
      b(idown(n), iup(n)) = g;
    } else {
      b(iup(n), idown(n)) = kI * g;     // -alpha sigma_y
      b(idown(n), iup(n)) = -kI * g;
    }
  }
  return b;
}

Eigen::MatrixXcd channel_static_matrix(const ModelParams& params) {
  params.validate();
  const int nb = params.n_basis;
  const double g = params.soi.coupling;
  const Eigen::MatrixXd dm = transverse_derivative_matrix(nb, params.d);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * nb, 2 * nb);
  for (int n = 1; n <= nb; ++n) {
    const double t = 0.5 * std::pow(M_PI * n / params.d, 2);
    c(iup(n), iup(n)) = t;
    c(idown(n), idown(n)) = t;
  }
  for (int n = 1; n <= nb; ++n)
    for (int m = 1; m <= nb; ++m) {
      if (dm(n - 1, m - 1) == 0.0) continue;
      if (params.soi.kind == SoiKind::Dresselhaus) {
        // -beta sigma_y p_y with p_y = -i D
        c(iup(n), idown(m)) += g * dm(n - 1, m - 1);
        c(idown(n), iup(m)) += -g * dm(n - 1, m - 1);
      } else {
        // +alpha sigma_x p_y
        c(iup(n), idown(m)) += -kI * g * dm(n - 1, m - 1);
        c(idown(n), iup(m)) += -kI * g * dm(n - 1, m - 1);
      }
    }
  return c;
}

Eigen::MatrixXcd hamiltonian_at_k(double kx, const ModelParams& params) {
  const int dim = 2 * params.n_basis;
  return channel_static_matrix(params) + kx * soi_longitudinal_matrix(params) +
         0.5 * kx * kx * Eigen::MatrixXcd::Identity(dim, dim);
}

Spinor2 ChannelMode::profile(double y, double d) const {
  Spinor2 s;
  for (int n = 1; n <= static_cast<int>(up.size()); ++n) {
    const double phi = transverse_basis(n, y, d);
    s.up += up[n - 1] * phi;
    s.down += down[n - 1] * phi;
  }
  return s;
}

Spinor2 ChannelMode::evaluate(double x, double y, double d) const {
  const Complex phase = std::exp(kI * k * x);
  Spinor2 s = profile(y, d);
  s.up *= phase;
  s.down *= phase;
  return s;
}

ModeSet modes_at_energy(double energy, const ModelParams& params, int n_evanescent) {
  params.validate();
  const int nb = params.n_basis;
  const int dim = 2 * nb;
  const Eigen::MatrixXcd b = soi_longitudinal_matrix(params);
  const Eigen::MatrixXcd c = channel_static_matrix(params);

  // (k^2/2 + k B + C - E) v = 0, linearized as a 2*dim companion eigenproblem
  // for [v; k v].
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  companion.topRightCorner(dim, dim) = Eigen::MatrixXcd::Identity(dim, dim);
  companion.bottomLeftCorner(dim, dim) =
      -2.0 * (c - energy * Eigen::MatrixXcd::Identity(dim, dim));
  companion.bottomRightCorner(dim, dim) = -2.0 * b;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("modes_at_energy: companion eigensolve failed");

  std::vector<RawMode> raw;
  raw.reserve(2 * dim);
  for (int j = 0; j < 2 * dim; ++j) {
    RawMode r;
    r.k = es.eigenvalues()[j];
    r.v = es.eigenvectors().col(j).head(dim);
    if (r.v.norm() < 1e-12) continue;  // defective companion vector
    r.residual = mode_residual(r.k, r.v, b, c, energy);
    if (r.residual > 1e-8) continue;
    raw.push_back(std::move(r));
  }
  canonicalize_degenerate_pairs(raw);

  ModeSet set;
  set.energy = energy;
  std::vector<ChannelMode> right_ev, left_ev;
  for (const auto& r : raw) {
    const double im_tol = 1e-8 * std::max(1.0, std::abs(r.k.real()));
    if (std::abs(r.k.imag()) <= im_tol) {
      ChannelMode m = make_mode(r, energy, b, 1e-10);
      if (m.velocity > 0.0)
        set.right_propagating.push_back(std::move(m));
      else
        set.left_propagating.push_back(std::move(m));
    } else if (r.k.imag() > 0.0) {
      right_ev.push_back(make_mode(r, energy, b, 1e-10));
    } else {
      left_ev.push_back(make_mode(r, energy, b, 1e-10));
    }
  }

  auto by_absk_desc = [](const ChannelMode& a, const ChannelMode& bm) {
    const double ka = std::abs(a.k.real()), kb = std::abs(bm.k.real());
    if (std::abs(ka - kb) > 1e-10 * (1.0 + ka)) return ka > kb;
    // degenerate pair: up-dominant member first
    return a.up.squaredNorm() > bm.up.squaredNorm();
  };
  std::sort(set.right_propagating.begin(), set.right_propagating.end(), by_absk_desc);
  std::sort(set.left_propagating.begin(), set.left_propagating.end(), by_absk_desc);

  auto by_im_asc = [](const ChannelMode& a, const ChannelMode& bm) {
    return std::abs(a.k.imag()) < std::abs(bm.k.imag());
  };
  std::sort(right_ev.begin(), right_ev.end(), by_im_asc);
  std::sort(left_ev.begin(), left_ev.end(), by_im_asc);

  int keep = n_evanescent;
  if (keep < 0) keep = nb - static_cast<int>(set.right_propagating.size());
  keep = std::max(0, keep);
  if (static_cast<int>(right_ev.size()) > keep) right_ev.resize(keep);
  if (static_cast<int>(left_ev.size()) > keep) left_ev.resize(keep);
  set.right_evanescent = std::move(right_ev);
  set.left_evanescent = std::move(left_ev);
  return set;
}

double group_velocity(const ChannelMode& mode, const ModelParams& params) {
  if (!mode.propagating)
    throw std::invalid_argument("group_velocity: evanescent mode has no group velocity");
  const Eigen::MatrixXcd b = soi_longitudinal_matrix(params);
  const Eigen::VectorXcd v = stacked(mode);
  return ((v.adjoint() * (mode.k.real() * v + b * v)).value().real()) / v.squaredNorm();
}

SpinDensity channel_spin_density(const ChannelMode& mode, double x, double y, double d) {
  const Spinor2 psi = mode.evaluate(x, y, d);
  SpinDensity s;
  const Complex cross = std::conj(psi.up) * psi.down;
  s.sx = cross.real();
  s.sy = cross.imag();
  s.sz = 0.5 * (std::norm(psi.up) - std::norm(psi.down));
  s.probability = std::norm(psi.up) + std::norm(psi.down);
  return s;
}

std::vector<DispersionBranch> dispersion(double kx_min, double kx_max, int n_samples,
                                         const ModelParams& params) {
  params.validate();
  if (n_samples < 2) throw std::invalid_argument("dispersion: need at least 2 samples");
  if (!(kx_max > kx_min)) throw std::invalid_argument("dispersion: empty k range");
  const int dim = 2 * params.n_basis;

  std::vector<DispersionBranch> branches(dim);
  Eigen::MatrixXcd prev_vecs;
  std::vector<int> order(dim);  // branch index -> eigenvalue column

  for (int i = 0; i < n_samples; ++i) {
    const double k = kx_min + (kx_max - kx_min) * i / (n_samples - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hamiltonian_at_k(k, params));
    if (es.info() != Eigen::Success) throw std::runtime_error("dispersion: eigensolve failed");

    if (i == 0) {
      for (int j = 0; j < dim; ++j) order[j] = j;
    } else {
      // greedy overlap matching against the previous point
      Eigen::MatrixXd overlap =
          (prev_vecs.adjoint() * es.eigenvectors()).cwiseAbs().real();
      std::vector<int> new_order(dim, -1);
      std::vector<bool> used(dim, false);
      for (int bi = 0; bi < dim; ++bi) {
        const int prev_col = order[bi];
        int best = -1, second = -1;
        for (int col = 0; col < dim; ++col) {
          if (used[col]) continue;
          if (best < 0 || overlap(prev_col, col) > overlap(prev_col, best)) {
            second = best;
            best = col;
          } else if (second < 0 || overlap(prev_col, col) > overlap(prev_col, second)) {
            second = col;
          }
        }
        if (second >= 0 && overlap(prev_col, best) - overlap(prev_col, second) < 0.2)
          branches[bi].ambiguous = true;
        new_order[bi] = best;
        used[best] = true;
      }
      order = new_order;
    }
    for (int bi = 0; bi < dim; ++bi)
      branches[bi].samples.emplace_back(k, es.eigenvalues()[order[bi]]);
    prev_vecs = es.eigenvectors();

    if (i == n_samples - 1) {
      // label branches at the last grid point: dominant transverse index,
      // spin-split tag by energy order within each index group
      for (int bi = 0; bi < dim; ++bi) {
        branches[bi].transverse_index =
            dominant_transverse_index(es.eigenvectors().col(order[bi]));
      }
    }
  }

  // split label: within each transverse group, tag lower/upper final energy
  for (int n = 1; n <= params.n_basis; ++n) {
    std::vector<int> group;
    for (int bi = 0; bi < dim; ++bi)
      if (branches[bi].transverse_index == n) group.push_back(bi);
    if (group.size() == 2) {
      const double ea = branches[group[0]].samples.back().second;
      const double eb = branches[group[1]].samples.back().second;
      if (std::abs(ea - eb) < 1e-12 * (1.0 + std::abs(ea))) {
        branches[group[0]].split_label = branches[group[1]].split_label = 0;
      } else {
        branches[group[0]].split_label = ea < eb ? -1 : +1;
        branches[group[1]].split_label = ea < eb ? +1 : -1;
      }
    }
  }
  return branches;
}

void write_band_csv(std::ostream& os, const std::vector<DispersionBranch>& branches) {
  os << "branch_id,k,E\n";
  for (const auto& br : branches) {
    std::string id = "n" + std::to_string(br.transverse_index) + "s" +
                     (br.split_label > 0 ? "+" : br.split_label < 0 ? "-" : "0");
    for (const auto& [k, e] : br.samples) os << id << "," << k << "," << e << "\n";
  }
}

}  // namespace sb
