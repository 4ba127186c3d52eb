#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace spinline {

// Two-sublattice mean-field model.  Energies in kelvin, the field points along y
// and the exchange tensor is diag(J, J(1 + eps sin psi), J(1 + eps cos psi)).
struct MFParams {
  double J = 0.7;
  double epsilon = 0.0;
  double psi = 0.0;
  double g = 2.004;
  double B = 0.0;  // tesla
  double T = 0.0;  // kelvin

  void validate() const;
  std::array<double, 3> couplings() const;
  double field_kelvin() const;  // g mu_B B / k_B
};

inline constexpr double kHalfPi = std::numbers::pi / 2;
inline constexpr double kTemperatureFloor = 1e-4;
inline constexpr double kAngleTolerance = 1e-6;

enum class Phase { paramagnetic, spin_flop, antiferromagnetic };
const char* phase_name(Phase p);

// Orientation of both sublattices, u = (sin t cos p, sin t sin p, cos t).
struct Orientation {
  double theta1 = kHalfPi, phi1 = kHalfPi;
  double theta2 = kHalfPi, phi2 = kHalfPi;
};

struct MFState {
  double M1 = 0.0, M2 = 0.0;
  double theta1 = kHalfPi, theta2 = kHalfPi;
  double phi1 = kHalfPi, phi2 = kHalfPi;
  double lambda1 = 0.0, lambda2 = 0.0;
  double free_energy = 0.0;
  double residual = 0.0;
  Phase phase = Phase::paramagnetic;

  Orientation orientation() const { return {theta1, phi1, theta2, phi2}; }
  double dtheta() const;  // angle between the two sublattice directions
};

// Variational free energy F0(lambda) + <H1>_0 with lambda fixed by M = tanh(lambda/T).
// Templated so the linearization can evaluate it in extended precision.
template <class R>
R free_energy_bound_t(const MFParams& p, R M1, R M2, R t1, R f1, R t2, R f2);

double free_energy_bound(const MFParams& p, double M1, double M2, const Orientation& o);

// Lowest free-energy in-plane (yz) equilibrium among the paramagnetic,
// symmetric canted and collinear branches.
MFState solve_equilibrium(const MFParams& p);

// Stationary refinement in all four angles started from a given state.
MFState solve_equilibrium_3d(const MFParams& p, const MFState& seed);

// Residual of the consistency relations plus the angular gradient.
double consistency_residual(const MFParams& p, const MFState& s);

double critical_field(const MFParams& p);             // tesla, T = 0 closed form
double spin_flop_field(const MFParams& p);            // tesla, exact T = 0 in-plane crossing, 0 if none
double spin_flop_field_first_order(const MFParams& p);  // tesla, J sqrt(2 eps (sin psi - cos psi))
double neel_temperature(const MFParams& p);           // kelvin, in-plane easy axis at B = 0

struct PhaseCell {
  double T = 0.0, B = 0.0;
  MFState state;
  bool ok = true;
  std::string error;
};

// Row-major over (T, B): index = iT * B.size() + iB.
std::vector<PhaseCell> phase_diagram(const MFParams& tmpl, const std::vector<double>& T,
                                     const std::vector<double>& B, int jobs = 1);

// ---- implementation of the template ----

template <class R>
R free_energy_bound_t(const MFParams& p, R M1, R M2, R t1, R f1, R t2, R f2) {
  using std::cos;
  using std::log;
  using std::sin;
  const auto Jc = p.couplings();
  const R Bk = R(p.field_kelvin());
  const R T = R(p.T);
  auto entropy = [&](R M) {
    // -T S(M) for an Ising-like spin with polarization M
    R a = (R(1) + M) / R(2), b = (R(1) - M) / R(2);
    R v = R(0);
    if (a > R(0)) v += a * log(a);
    if (b > R(0)) v += b * log(b);
    return T * v;
  };
  const R u1x = sin(t1) * cos(f1), u1y = sin(t1) * sin(f1), u1z = cos(t1);
  const R u2x = sin(t2) * cos(f2), u2y = sin(t2) * sin(f2), u2z = cos(t2);
  const R K = R(Jc[0]) * u1x * u2x + R(Jc[1]) * u1y * u2y + R(Jc[2]) * u1z * u2z;
  return entropy(M1) + entropy(M2) - Bk * (M1 * u1y + M2 * u2y) + M1 * M2 * K;
}

}  // namespace spinline
