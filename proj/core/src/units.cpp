#include "sb/units.hpp"

namespace sb {

double UnitSystem::energy_unit_meV() const {
  validate();
  const double m = m_eff * constants::electron_mass;
  const double l0 = l0_nm * 1e-9;
  const double eps0_J = constants::hbar * constants::hbar / (m * l0 * l0);
  return eps0_J / constants::electron_volt * 1e3;
}

double billiard_diameter_nm(double radius_dimensionless, const UnitSystem& u) {
  u.validate();
  if (!(radius_dimensionless > 0.0))
    throw std::invalid_argument("billiard_diameter_nm: radius must be > 0");
  return 2.0 * radius_dimensionless * u.l0_nm;
}

}  // namespace sb
