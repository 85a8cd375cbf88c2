#pragma once

#include <stdexcept>

namespace sb {

// Physical constants, CODATA 2018 (SI).
namespace constants {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double electron_mass = 9.1093837015e-31; // kg
inline constexpr double electron_volt = 1.602176634e-19;  // J
}

/// Dimensionless unit system: hbar = m = 1, lengths measured in l0.
/// Energy unit eps0 = hbar^2/(m l0^2), coupling unit beta0 = hbar^2/(m l0),
/// so eps0 * l0 = beta0 holds identically.
struct UnitSystem {
  double l0_nm = 30.0;   // length unit, nanometers
  double m_eff = 0.067;  // carrier mass in units of the free-electron mass

  void validate() const {
    if (!(l0_nm > 0.0)) throw std::invalid_argument("UnitSystem: l0 must be > 0");
    if (!(m_eff > 0.0)) throw std::invalid_argument("UnitSystem: m_eff must be > 0");
  }

  /// eps0 in meV.
  double energy_unit_meV() const;

  /// beta0 in meV nm. Computed as eps0 * l0 so the consistency
  /// relation eps0 * l0 = beta0 is exact in floating point.
  double coupling_unit_meV_nm() const { return energy_unit_meV() * l0_nm; }

  // dimensionless <-> physical
  double to_meV(double energy) const { return energy * energy_unit_meV(); }
  double from_meV(double energy_meV) const { return energy_meV / energy_unit_meV(); }
  double to_nm(double length) const { return length * l0_nm; }
  double from_nm(double length_nm) const { return length_nm / l0_nm; }
  double to_meV_nm(double coupling) const { return coupling * coupling_unit_meV_nm(); }
  double from_meV_nm(double c_meV_nm) const { return c_meV_nm / coupling_unit_meV_nm(); }
  /// k in nm^-1 for a dimensionless wavenumber.
  double to_inv_nm(double k) const { return k / l0_nm; }
};

/// Physical diameter 2*R*l0 of the billiard, in nm.
double billiard_diameter_nm(double radius_dimensionless, const UnitSystem& u);

}  // namespace sb
