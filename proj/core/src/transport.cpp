#include "sb/transport.hpp"
namespace sb {
double energy_width_from_k(double k_fermi, double dk_fermi) {
  if (!(k_fermi > 0.0)) throw std::invalid_argument("energy_width_from_k: k_fermi must be > 0");
  if (!(dk_fermi >= 0.0)) throw std::invalid_argument("energy_width_from_k: dk_fermi must be >= 0");
  return k_fermi * dk_fermi;
}
}
