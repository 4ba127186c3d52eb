#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "spinline/meanfield.hpp"

namespace spinline {

using cplx = std::complex<double>;

// Linear LLG dynamics of (d theta1, d phi1, d theta2, d phi2) about an equilibrium.
// Frequencies are in kelvin (hbar Omega / k_B); the paramagnetic line sits at
// g mu_B B / k_B, so kelvin_to_hz converts to laboratory frequency.
struct LinearizedDynamics {
  Eigen::Matrix4d matrix;
  Eigen::Matrix4d hessian;  // second derivatives of F in the working frame
  MFState equilibrium;
  double gilbert_gamma = 0.0;
  double J = 0.0;
  double field_kelvin = 0.0;
  bool rotated = false;  // working frame differs from the laboratory frame
};

struct ResonanceModes {
  std::vector<cplx> omegas;  // sorted by real part
  cplx selected{0.0, 0.0};
  bool has_selected = false;
  bool defective = false;
  double condition = 1.0;
  double psi = 0.0;
};

// Hessian of the free-energy bound in the four angles at fixed magnitudes,
// central differences in extended precision.  Exposed for the step checks.
Eigen::Matrix4d angular_hessian(const MFParams& p, const MFState& eq, double step = 1e-5,
                                bool force_rotation = false);

LinearizedDynamics linearize(const MFState& eq, const MFParams& p, double gamma, double step = 1e-5,
                             bool force_rotation = false);

ResonanceModes resonance_modes(const LinearizedDynamics& dyn);

// Selected mode for the equilibrium of p (convenience wrapper).
ResonanceModes resonance_at(const MFParams& p, double gamma);

// sqrt(Bbar^2 - 2 J^2 eps (sin psi - cos psi)) in kelvin.
double analytic_resonance(const MFParams& p);

// Exact T = 0 frequency of the in-plane mode of the symmetric canted state:
// Omega^2 = (Jx+Jz)/(Jy+Jz) Bbar^2 + (Jx+Jz)(Jz-Jy).
double canted_resonance_exact(const MFParams& p);

// Gilbert damping that reproduces a paramagnetic linewidth Gamma (Hz) at field B.
double gilbert_from_linewidth(double gamma_hz, double B, double g);

struct ModeNode {
  double psi = 0.0;
  double weight = 0.0;  // sin(psi) d psi, normalized to unit sum
  cplx omega{0.0, 0.0};
  Phase phase = Phase::paramagnetic;
  bool ok = true;
  std::string flags;
};

// Orientation average nodes: Gauss-Legendre in cos(psi) on [0, 1].
std::vector<ModeNode> powder_mode_distribution(const MFParams& p, double gamma, int nodes = 64,
                                               int jobs = 1);

}  // namespace spinline
