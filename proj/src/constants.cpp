#include "spinline/constants.hpp"

#include <cmath>

#include "spinline/error.hpp"

namespace spinline {

const PhysicalConstants& constants() {
  static const PhysicalConstants c{};
  return c;
}

double zeeman_frequency(double B, double g) {
  require(std::isfinite(B) && B >= 0.0, "zeeman_frequency: field must be >= 0", Errc::domain);
  const auto& c = constants();
  return g * c.mu_B * B / c.h;
}

double zeeman_kelvin(double B, double g) {
  require(std::isfinite(B) && B >= 0.0, "zeeman_kelvin: field must be >= 0", Errc::domain);
  const auto& c = constants();
  return g * c.mu_B * B / c.k_B;
}

double hz_to_kelvin(double f) { return constants().h * f / constants().k_B; }
double kelvin_to_hz(double e) { return constants().k_B * e / constants().h; }

double angular_to_linear(double w) { return w / (2.0 * std::numbers::pi); }
double linear_to_angular(double f) { return f * (2.0 * std::numbers::pi); }

double bose_occupation(double f, double T) {
  require(f >= 0.0 && T >= 0.0, "bose_occupation: need f >= 0 and T >= 0", Errc::domain);
  if (T == 0.0) {
    require(f > 0.0, "bose_occupation: f = 0 at T = 0 is undefined", Errc::domain);
    return 0.0;
  }
  require(f > 0.0, "bose_occupation: divergent at f = 0", Errc::domain);
  return 1.0 / std::expm1(hz_to_kelvin(f) / T);
}

double spin_polarization(double f, double T) {
  require(f >= 0.0 && T >= 0.0, "spin_polarization: need f >= 0 and T >= 0", Errc::domain);
  if (f == 0.0) return 0.0;
  if (T == 0.0) return 1.0;
  return std::tanh(hz_to_kelvin(f) / (2.0 * T));
}

double curie_constant_half(double g) {
  // cgs: N_A mu_B^2 / k_B with mu_B in erg/G and k_B in erg/K
  const auto& c = constants();
  const double mu_B_cgs = c.mu_B * 1e3;  // J/T -> erg/G
  const double k_B_cgs = c.k_B * 1e7;
  return c.N_A * g * g * mu_B_cgs * mu_B_cgs / (4.0 * k_B_cgs);
}

}  // namespace spinline
