#include "sb/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace sb {

namespace {

constexpr Complex kI{0.0, 1.0};

int round_up_even(double x) {
  int n = static_cast<int>(std::ceil(x));
  return n + (n & 1);
}

// Midpoint nodes on [a, b], optionally with geometrically clustered extra
// points toward both ends (reentrant mouth corners).
void arc_points(double a, double b, int count, bool corner_refine, double radius,
                std::vector<Eigen::Vector2d>& pts, std::vector<double>& wts) {
  const double h = (b - a) / count;
  for (int i = 0; i < count; ++i) {
    const double phi = a + (i + 0.5) * h;
    pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi));
    wts.push_back(radius * h);
  }
  if (!corner_refine) return;
  for (int k = 1; k <= 6; ++k) {
    const double off = 0.5 * h * std::pow(0.5, k);
    const double w = radius * off;  // ~ local spacing
    for (double phi : {a + off, b - off}) {
      pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi));
      wts.push_back(w);
    }
  }
}

struct InteriorRows {
  // basis values and x-derivatives at one point, laid out [c block | d block]
  Eigen::RowVectorXcd up, down, dup, ddown;
};

InteriorRows interior_rows(const InteriorBasis& basis, double x, double y, bool derivs) {
  const int t = static_cast<int>(basis.thetas.size());
  InteriorRows r;
  r.up.resize(2 * t);
  r.down.resize(2 * t);
  if (derivs) {
    r.dup.resize(2 * t);
    r.ddown.resize(2 * t);
  }
  for (int j = 0; j < t; ++j) {
    const double ct = std::cos(basis.thetas[j]);
    const double st = std::sin(basis.thetas[j]);
    const double dot = x * ct + y * st;
    const Complex php = std::exp(kI * (basis.k_plus * dot));
    const Complex phm = std::exp(kI * (basis.k_minus * dot));
    r.up[j] = php * basis.chi_plus[j].up;
    r.down[j] = php * basis.chi_plus[j].down;
    r.up[t + j] = phm * basis.chi_minus[j].up;
    r.down[t + j] = phm * basis.chi_minus[j].down;
    if (derivs) {
      const Complex gp = kI * basis.k_plus * ct;
      const Complex gm = kI * basis.k_minus * ct;
      r.dup[j] = gp * r.up[j];
      r.ddown[j] = gp * r.down[j];
      r.dup[t + j] = gm * r.up[t + j];
      r.ddown[t + j] = gm * r.down[t + j];
    }
  }
  return r;
}

Spinor2 interior_eval(const InteriorBasis& basis, const Eigen::VectorXcd& c,
                      const Eigen::VectorXcd& d, double x, double y) {
  const int t = static_cast<int>(basis.thetas.size());
  Spinor2 s;
  for (int j = 0; j < t; ++j) {
    const double ct = std::cos(basis.thetas[j]);
    const double st = std::sin(basis.thetas[j]);
    const double dot = x * ct + y * st;
    const Complex php = std::exp(kI * (basis.k_plus * dot));
    const Complex phm = std::exp(kI * (basis.k_minus * dot));
    s.up += c[j] * php * basis.chi_plus[j].up + d[j] * phm * basis.chi_minus[j].up;
    s.down += c[j] * php * basis.chi_plus[j].down + d[j] * phm * basis.chi_minus[j].down;
  }
  return s;
}

// Transverse profile matrix Phi(i, n) = phi_n(y_i).
Eigen::MatrixXd profile_matrix(const std::vector<double>& ys, int n_basis, double d) {
  Eigen::MatrixXd phi(ys.size(), n_basis);
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (int n = 1; n <= n_basis; ++n) phi(i, n - 1) = transverse_basis(n, ys[i], d);
  return phi;
}

struct LeadBlock {
  // value (up/down) of each outgoing mode at the mouth ordinates; the
  // longitudinal phase is referenced to the mouth plane, so it is 1 there.
  Eigen::MatrixXcd up, down;   // (#ordinates, #modes)
  std::vector<Complex> k;      // longitudinal wavenumbers
  int n_prop = 0;
};

LeadBlock lead_block(const std::vector<ChannelMode>& prop,
                     const std::vector<ChannelMode>& evan, const Eigen::MatrixXd& phi) {
  LeadBlock blk;
  const int m = static_cast<int>(phi.rows());
  const int total = static_cast<int>(prop.size() + evan.size());
  blk.up.resize(m, total);
  blk.down.resize(m, total);
  blk.n_prop = static_cast<int>(prop.size());
  int col = 0;
  auto add = [&](const ChannelMode& mode) {
    blk.up.col(col) = phi * mode.up;
    blk.down.col(col) = phi * mode.down;
    blk.k.push_back(mode.k);
    ++col;
  };
  for (const auto& mode : prop) add(mode);
  for (const auto& mode : evan) add(mode);
  return blk;
}

}  // namespace

void DiscretizationConfig::validate() const {
  if (n_theta < 0 || (n_theta > 0 && n_theta < 8))
    throw std::invalid_argument("DiscretizationConfig: n_theta must be 0 (auto) or >= 8");
  if (n_theta % 2 != 0)
    throw std::invalid_argument("DiscretizationConfig: n_theta must be even");
  if (theta_margin < 4) throw std::invalid_argument("DiscretizationConfig: theta_margin < 4");
  if (!(wall_points_per_wavelength >= 2.0))
    throw std::invalid_argument("DiscretizationConfig: need >= 2 wall points per wavelength");
  if (mouth_points < 4) throw std::invalid_argument("DiscretizationConfig: mouth_points < 4");
  if (!(svd_cutoff > 0.0 && svd_cutoff < 1.0))
    throw std::invalid_argument("DiscretizationConfig: svd_cutoff out of range");
  if (!(flux_tol > 0.0) || !(wall_tol > 0.0))
    throw std::invalid_argument("DiscretizationConfig: tolerances must be positive");
  if (check_point_factor < 1)
    throw std::invalid_argument("DiscretizationConfig: check_point_factor < 1");
}

DiscretizationConfig DiscretizationConfig::resolved(const ModelParams& params,
                                                    double k_fermi) const {
  validate();
  params.validate();
  DiscretizationConfig r = *this;
  const double energy = 0.5 * k_fermi * k_fermi;
  const double k_minus = fermi_radii(energy, params.soi).k_minus;
  if (r.n_theta == 0) r.n_theta = round_up_even(k_minus * params.R + theta_margin) * 2;
  if (r.wall_points == 0)
    r.wall_points = std::max(min_wall_points,
                             static_cast<int>(std::ceil(wall_points_per_wavelength * k_minus * params.R)));
  if (r.derivative_weight == 0.0) r.derivative_weight = 1.0 / std::max(k_minus, 1.0);
  return r;
}

BilliardGeometry build_geometry(const ModelParams& params, const DiscretizationConfig& disc) {
  params.validate();
  if (disc.n_theta == 0 || disc.wall_points == 0)
    throw std::invalid_argument("build_geometry: discretization not resolved");
  BilliardGeometry g;
  g.R = params.R;
  g.d = params.d;
  g.q = std::sqrt(params.R * params.R - 0.25 * params.d * params.d);

  // Mouth arcs subtend |phi| < phi_m around 0 and pi; everything else is wall.
  const double phi_m = std::asin(0.5 * params.d / params.R);
  const int per_arc = (disc.wall_points + 1) / 2;
  arc_points(phi_m, M_PI - phi_m, per_arc, disc.corner_refine, params.R, g.wall_points,
             g.wall_weights);
  arc_points(M_PI + phi_m, 2.0 * M_PI - phi_m, per_arc, disc.corner_refine, params.R,
             g.wall_points, g.wall_weights);

  // Independent, finer check set (offset midpoints, no corner clusters).
  {
    std::vector<double> unused;
    std::vector<Eigen::Vector2d> pts;
    const int per_arc_chk = per_arc * disc.check_point_factor + 1;
    arc_points(phi_m, M_PI - phi_m, per_arc_chk, false, params.R, pts, unused);
    arc_points(M_PI + phi_m, 2.0 * M_PI - phi_m, per_arc_chk, false, params.R, pts, unused);
    g.wall_check_points = std::move(pts);
  }

  // Chebyshev-clustered matching ordinates across the opening.
  const int m = disc.mouth_points;
  for (int i = 0; i < m; ++i) {
    const double t = M_PI * (i + 0.5) / m;
    g.mouth_y.push_back(0.5 * params.d * std::cos(t));
    g.mouth_weights.push_back(0.5 * params.d * (M_PI / m) * std::sin(t));
  }
  const int mc = m * disc.check_point_factor + 1;
  for (int i = 0; i < mc; ++i)
    g.mouth_check_y.push_back(0.5 * params.d * std::cos(M_PI * (i + 0.5) / mc));
  return g;
}

InteriorBasis build_interior_basis(double energy, const Soi& soi, int n_theta) {
  if (n_theta < 8) throw std::invalid_argument("build_interior_basis: n_theta too small");
  InteriorBasis b;
  b.energy = energy;
  const FermiRadii kr = fermi_radii(energy, soi);
  b.k_plus = kr.k_plus;
  b.k_minus = kr.k_minus;
  b.thetas.reserve(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    const double theta = 2.0 * M_PI * j / n_theta;
    b.thetas.push_back(theta);
    b.chi_plus.push_back(interior_spinor(theta, +1, soi));
    b.chi_minus.push_back(interior_spinor(theta, -1, soi));
  }
  return b;
}

AssembledSystem assemble_system(double energy, const BilliardGeometry& geom,
                                const InteriorBasis& basis, const ModeSet& modes,
                                const ModelParams& params, const DiscretizationConfig& disc,
                                const IncidentSpec& incident) {
  if (incident.lead != 1 && incident.lead != 2)
    throw std::invalid_argument("IncidentSpec: lead must be 1 or 2");
  if (std::abs(basis.energy - energy) > 1e-12 * (1.0 + std::abs(energy)) ||
      std::abs(modes.energy - energy) > 1e-12 * (1.0 + std::abs(energy)))
    throw std::invalid_argument("assemble_system: basis/modes built at a different energy");
  const auto& inc_pool = incident.lead == 1 ? modes.right_propagating : modes.left_propagating;
  if (incident.mode_index < 0 || incident.mode_index >= static_cast<int>(inc_pool.size()))
    throw std::invalid_argument("IncidentSpec: no such propagating mode at this energy");
  if (modes.right_propagating.empty())
    throw std::invalid_argument("assemble_system: no propagating channel at this energy");

  const int t = static_cast<int>(basis.thetas.size());
  const int n_mouth = static_cast<int>(geom.mouth_y.size());
  const Eigen::MatrixXd phi = profile_matrix(geom.mouth_y, params.n_basis, params.d);

  // Lead 1 (left) outgoing: leftward movers and left-decaying evanescents;
  // lead 2 (right): rightward movers and right-decaying evanescents.
  const LeadBlock l1 = lead_block(modes.left_propagating, modes.left_evanescent, phi);
  const LeadBlock l2 = lead_block(modes.right_propagating, modes.right_evanescent, phi);

  AssembledSystem sys;
  sys.n_theta = t;
  sys.lead1_offset = 2 * t;
  sys.lead1_prop = l1.n_prop;
  sys.lead1_evan = static_cast<int>(l1.k.size()) - l1.n_prop;
  sys.lead2_offset = sys.lead1_offset + static_cast<int>(l1.k.size());
  sys.lead2_prop = l2.n_prop;
  sys.lead2_evan = static_cast<int>(l2.k.size()) - l2.n_prop;

  const int n_cols = sys.lead2_offset + static_cast<int>(l2.k.size());
  const int n_wall = static_cast<int>(geom.wall_points.size());
  const int n_rows = 2 * n_wall + 8 * n_mouth;
  sys.a = Eigen::MatrixXcd::Zero(n_rows, n_cols);
  sys.rhs = Eigen::VectorXcd::Zero(n_rows);

  int row = 0;
  // (i) hard-wall condition, both spinor components
  for (int i = 0; i < n_wall; ++i) {
    const double w = std::sqrt(geom.wall_weights[i]);
    const InteriorRows r =
        interior_rows(basis, geom.wall_points[i].x(), geom.wall_points[i].y(), false);
    sys.a.row(row++).head(2 * t) = w * r.up;
    sys.a.row(row++).head(2 * t) = w * r.down;
  }

  // (ii)+(iii) mouth matching: psi and d psi/dx continuity, both components
  const ChannelMode& inc = inc_pool[incident.mode_index];
  const Eigen::VectorXcd inc_up = phi * inc.up;
  const Eigen::VectorXcd inc_down = phi * inc.down;
  const double wd = disc.derivative_weight;

  for (int lead = 1; lead <= 2; ++lead) {
    const double xm = lead == 1 ? -geom.q : geom.q;
    const LeadBlock& blk = lead == 1 ? l1 : l2;
    const int off = lead == 1 ? sys.lead1_offset : sys.lead2_offset;
    const bool carries_incident = incident.lead == lead;
    for (int i = 0; i < n_mouth; ++i) {
      const double w = std::sqrt(geom.mouth_weights[i]);
      const InteriorRows r = interior_rows(basis, xm, geom.mouth_y[i], true);
      const int rv_up = row++, rv_dn = row++, rd_up = row++, rd_dn = row++;
      sys.a.row(rv_up).head(2 * t) = w * r.up;
      sys.a.row(rv_dn).head(2 * t) = w * r.down;
      sys.a.row(rd_up).head(2 * t) = (w * wd) * r.dup;
      sys.a.row(rd_dn).head(2 * t) = (w * wd) * r.ddown;
      for (int mcol = 0; mcol < static_cast<int>(blk.k.size()); ++mcol) {
        const Complex ik = kI * blk.k[mcol];
        sys.a(rv_up, off + mcol) = -w * blk.up(i, mcol);
        sys.a(rv_dn, off + mcol) = -w * blk.down(i, mcol);
        sys.a(rd_up, off + mcol) = -(w * wd) * ik * blk.up(i, mcol);
        sys.a(rd_dn, off + mcol) = -(w * wd) * ik * blk.down(i, mcol);
      }
      if (carries_incident) {
        const Complex ik = kI * inc.k;
        sys.rhs(rv_up) = w * inc_up(i);
        sys.rhs(rv_dn) = w * inc_down(i);
        sys.rhs(rd_up) = (w * wd) * ik * inc_up(i);
        sys.rhs(rd_dn) = (w * wd) * ik * inc_down(i);
      }
    }
  }

  double amp = 0.0;
  for (double y : geom.mouth_check_y) {
    const Spinor2 s = inc.profile(y, params.d);
    amp = std::max(amp, std::sqrt(s.norm2()));
  }
  sys.incident_amplitude = amp;
  return sys;
}

Eigen::VectorXcd least_squares_solve(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b,
                                     LeastSquaresMethod method, double rel_cutoff,
                                     LeastSquaresInfo* info) {
  const int n = static_cast<int>(a.cols());
  const int nmin = static_cast<int>(std::min(a.rows(), a.cols()));
  if (method == LeastSquaresMethod::ColPivQR) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::VectorXd diag(nmin);
    for (int i = 0; i < nmin; ++i) diag[i] = std::abs(qr.matrixQR()(i, i));
    const double dmax = diag[0];
    if (dmax == 0.0) throw std::runtime_error("least_squares_solve: zero matrix");
    int rank = 0;
    while (rank < nmin && diag[rank] > rel_cutoff * dmax) ++rank;
    Eigen::VectorXcd qtb = qr.householderQ().adjoint() * b;
    Eigen::VectorXcd y = qr.matrixQR()
                             .topLeftCorner(rank, rank)
                             .template triangularView<Eigen::Upper>()
                             .solve(qtb.head(rank));
    Eigen::VectorXcd xp = Eigen::VectorXcd::Zero(n);
    xp.head(rank) = y;
    if (info) {
      info->rank = rank;
      info->pivot_ratio = diag[rank - 1] / dmax;
      info->smallest_ratio = diag[nmin - 1] / dmax;
    }
    return qr.colsPermutation() * xp;
  }

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv[0];
  if (smax == 0.0) throw std::runtime_error("least_squares_solve: zero matrix");
  int rank = 0;
  while (rank < nmin && sv[rank] > rel_cutoff * smax) ++rank;
  Eigen::VectorXcd utb = svd.matrixU().leftCols(rank).adjoint() * b;
  Eigen::VectorXcd x = svd.matrixV().leftCols(rank) *
                       (utb.array() / sv.head(rank).array().cast<Complex>()).matrix();
  if (info) {
    info->rank = rank;
    info->pivot_ratio = sv[rank - 1] / smax;
    info->smallest_ratio = sv[nmin - 1] / smax;
  }
  return x;
}

ScatteringSolution solve_scattering(double energy, const ModelParams& params,
                                    const DiscretizationConfig& disc,
                                    const IncidentSpec& incident) {
  params.validate();
  const double k_fermi = std::sqrt(2.0 * energy);
  const DiscretizationConfig rd =
      (disc.n_theta == 0 || disc.wall_points == 0) ? disc.resolved(params, k_fermi) : disc;

  const BilliardGeometry geom = build_geometry(params, rd);
  const ModeSet modes = modes_at_energy(energy, params, rd.n_evanescent);
  const InteriorBasis basis = build_interior_basis(energy, params.soi, rd.n_theta);
  const AssembledSystem sys =
      assemble_system(energy, geom, basis, modes, params, rd, incident);

  LeastSquaresInfo info;
  const Eigen::VectorXcd x =
      least_squares_solve(sys.a, sys.rhs, rd.method, rd.svd_cutoff, &info);

  ScatteringSolution sol;
  sol.energy = energy;
  sol.k_fermi = k_fermi;
  sol.R = geom.R;
  sol.d = geom.d;
  sol.q = geom.q;
  sol.incident = incident;
  sol.basis = basis;
  sol.modes = modes;
  sol.rank = info.rank;
  sol.pivot_ratio = info.pivot_ratio;
  sol.funnel_indicator = info.smallest_ratio;

  const int t = sys.n_theta;
  sol.interior_c = x.segment(0, t);
  sol.interior_d = x.segment(t, t);
  sol.interior_norm = std::sqrt(sol.interior_c.squaredNorm() + sol.interior_d.squaredNorm());

  sol.lead1_evanescent = x.segment(sys.lead1_offset + sys.lead1_prop, sys.lead1_evan);
  sol.lead2_evanescent = x.segment(sys.lead2_offset + sys.lead2_prop, sys.lead2_evan);

  // c1, c2 ride +k1, +k2 in lead 2; c3, c4 ride -k1, -k2 in lead 1.
  sol.c1 = sys.lead2_prop > 0 ? x[sys.lead2_offset + 0] : Complex{};
  sol.c2 = sys.lead2_prop > 1 ? x[sys.lead2_offset + 1] : Complex{};
  sol.c3 = sys.lead1_prop > 0 ? x[sys.lead1_offset + 0] : Complex{};
  sol.c4 = sys.lead1_prop > 1 ? x[sys.lead1_offset + 1] : Complex{};

  double flux = 0.0;
  for (int i = 0; i < sys.lead1_prop; ++i) flux += std::norm(x[sys.lead1_offset + i]);
  for (int i = 0; i < sys.lead2_prop; ++i) flux += std::norm(x[sys.lead2_offset + i]);
  sol.flux_defect = std::abs(1.0 - flux);

  // Residuals on the independent check sets, relative to the incident wave.
  const double scale = sys.incident_amplitude > 0.0 ? sys.incident_amplitude : 1.0;
  double sum2 = 0.0, vmax = 0.0;
  for (const auto& p : geom.wall_check_points) {
    const Spinor2 s = interior_eval(basis, sol.interior_c, sol.interior_d, p.x(), p.y());
    const double v = std::sqrt(s.norm2());
    sum2 += v * v;
    vmax = std::max(vmax, v);
  }
  sol.wall_residual = std::sqrt(sum2 / geom.wall_check_points.size()) / scale;
  sol.wall_residual_max = vmax / scale;

  {
    const auto& inc_pool =
        incident.lead == 1 ? modes.right_propagating : modes.left_propagating;
    const ChannelMode& inc = inc_pool[incident.mode_index];
    double msum2 = 0.0;
    int mcount = 0;
    for (int lead = 1; lead <= 2; ++lead) {
      const double xm = lead == 1 ? -geom.q : geom.q;
      const auto& prop = lead == 1 ? modes.left_propagating : modes.right_propagating;
      const auto& evan = lead == 1 ? modes.left_evanescent : modes.right_evanescent;
      const Eigen::VectorXcd& evamp = lead == 1 ? sol.lead1_evanescent : sol.lead2_evanescent;
      for (double y : geom.mouth_check_y) {
        Spinor2 in = interior_eval(basis, sol.interior_c, sol.interior_d, xm, y);
        Spinor2 out;
        for (std::size_t i = 0; i < prop.size(); ++i) {
          const Complex amp = lead == 1 ? (i == 0 ? sol.c3 : sol.c4)
                                        : (i == 0 ? sol.c1 : sol.c2);
          const Spinor2 u = prop[i].profile(y, geom.d);
          out.up += amp * u.up;
          out.down += amp * u.down;
        }
        for (std::size_t i = 0; i < evan.size(); ++i) {
          const Spinor2 u = evan[i].profile(y, geom.d);
          out.up += evamp[i] * u.up;
          out.down += evamp[i] * u.down;
        }
        if (incident.lead == lead) {
          const Spinor2 u = inc.profile(y, geom.d);
          out.up += u.up;
          out.down += u.down;
        }
        msum2 += std::norm(in.up - out.up) + std::norm(in.down - out.down);
        ++mcount;
      }
    }
    sol.mouth_residual = std::sqrt(msum2 / mcount) / scale;
  }

  sol.converged = sol.wall_residual <= rd.wall_tol && sol.flux_defect <= rd.flux_tol;
  return sol;
}

double transmitted_probability(const ScatteringSolution& sol) {
  if (sol.incident.lead == 1) return std::norm(sol.c1) + std::norm(sol.c2);
  return std::norm(sol.c3) + std::norm(sol.c4);
}

double conductance(const ScatteringSolution& sol) {
  if (!sol.converged)
    throw std::runtime_error("conductance: solution did not meet the convergence gates");
  return transmitted_probability(sol);
}

Spinor2 interior_wavefunction(const ScatteringSolution& sol, double x, double y) {
  if (x * x + y * y > sol.R * sol.R)
    throw std::domain_error("interior_wavefunction: point outside the billiard");
  return interior_eval(sol.basis, sol.interior_c, sol.interior_d, x, y);
}

SpinDensity spin_density(const Spinor2& psi) {
  SpinDensity s;
  const Complex cross = std::conj(psi.up) * psi.down;
  s.sx = cross.real();
  s.sy = cross.imag();
  s.sz = 0.5 * (std::norm(psi.up) - std::norm(psi.down));
  s.probability = psi.norm2();
  return s;
}

ScatteringField::ScatteringField(const ScatteringSolution& sol, const ModelParams& params)
    : sol_(sol), R_(params.R), d_(params.d) {
  q_ = std::sqrt(params.R * params.R - 0.25 * params.d * params.d);
}

bool ScatteringField::inside(double x, double y) const {
  if (x * x + y * y < R_ * R_) return true;
  if (std::abs(y) <= 0.5 * d_) return x <= -q_ || x >= q_;
  return false;
}

Spinor2 ScatteringField::at(double x, double y) const {
  if (x * x + y * y < R_ * R_)
    return interior_eval(sol_.basis, sol_.interior_c, sol_.interior_d, x, y);
  if (std::abs(y) > 0.5 * d_ || (x > -q_ && x < q_))
    throw std::domain_error("ScatteringField::at: point outside the domain");

  const int lead = x <= -q_ ? 1 : 2;
  const double xl = lead == 1 ? x + q_ : x - q_;
  const auto& prop = lead == 1 ? sol_.modes.left_propagating : sol_.modes.right_propagating;
  const auto& evan = lead == 1 ? sol_.modes.left_evanescent : sol_.modes.right_evanescent;
  const Eigen::VectorXcd& evamp = lead == 1 ? sol_.lead1_evanescent : sol_.lead2_evanescent;

  Spinor2 out;
  for (std::size_t i = 0; i < prop.size(); ++i) {
    const Complex amp = lead == 1 ? (i == 0 ? sol_.c3 : sol_.c4)
                                  : (i == 0 ? sol_.c1 : sol_.c2);
    const Spinor2 u = prop[i].evaluate(xl, y, d_);
    out.up += amp * u.up;
    out.down += amp * u.down;
  }
  for (std::size_t i = 0; i < evan.size(); ++i) {
    const Spinor2 u = evan[i].evaluate(xl, y, d_);
    out.up += evamp[i] * u.up;
    out.down += evamp[i] * u.down;
  }
  if (sol_.incident.lead == lead) {
    const auto& pool =
        lead == 1 ? sol_.modes.right_propagating : sol_.modes.left_propagating;
    const Spinor2 u = pool[sol_.incident.mode_index].evaluate(xl, y, d_);
    out.up += u.up;
    out.down += u.down;
  }
  return out;
}

void write_solution_dump(std::ostream& os, const ScatteringSolution& sol,
                         const ModelParams& params, const DiscretizationConfig& disc) {
  os.precision(17);
  os << "k_fermi " << sol.k_fermi << "\n"
     << "energy " << sol.energy << "\n"
     << "soi " << (params.soi.kind == SoiKind::Dresselhaus ? "dresselhaus" : "rashba")
     << " " << params.soi.coupling << "\n"
     << "geometry d " << params.d << " R " << params.R << "\n"
     << "incident lead " << sol.incident.lead << " mode " << sol.incident.mode_index << "\n"
     << "n_basis " << params.n_basis << "\n"
     << "n_theta " << sol.basis.thetas.size() << "\n"
     << "wall_points " << disc.wall_points << "\n"
     << "mouth_points " << disc.mouth_points << "\n"
     << "svd_cutoff " << disc.svd_cutoff << "\n"
     << "rank " << sol.rank << "\n"
     << "c1 " << sol.c1.real() << " " << sol.c1.imag() << "\n"
     << "c2 " << sol.c2.real() << " " << sol.c2.imag() << "\n"
     << "c3 " << sol.c3.real() << " " << sol.c3.imag() << "\n"
     << "c4 " << sol.c4.real() << " " << sol.c4.imag() << "\n"
     << "flux_defect " << sol.flux_defect << "\n"
     << "wall_residual_rms " << sol.wall_residual << "\n"
     << "wall_residual_max " << sol.wall_residual_max << "\n"
     << "mouth_residual_rms " << sol.mouth_residual << "\n"
     << "interior_norm " << sol.interior_norm << "\n"
     << "converged " << (sol.converged ? 1 : 0) << "\n";
  os << "lead1_evanescent";
  for (int i = 0; i < sol.lead1_evanescent.size(); ++i)
    os << " " << sol.lead1_evanescent[i].real() << " " << sol.lead1_evanescent[i].imag();
  os << "\nlead2_evanescent";
  for (int i = 0; i < sol.lead2_evanescent.size(); ++i)
    os << " " << sol.lead2_evanescent[i].real() << " " << sol.lead2_evanescent[i].imag();
  os << "\n";
}

}  // namespace sb
