#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace spinline {

using Vec3 = std::array<double, 3>;
inline constexpr Vec3 kAxisY{0.0, 1.0, 0.0};

enum class Boundary { open, periodic };

// Anisotropic Heisenberg chain in the Pauli convention, energies in kelvin:
//   H = sum_<ij> sigma_i . diag(J, J(1 + eps sin psi), J(1 + eps cos psi)) . sigma_j
//       - g mu_B B / k_B * sum_i axis . sigma_i
struct ChainSpec {
  int n_spins = 1;
  double J = 0.7;
  double epsilon = 0.0;
  double psi = 0.0;
  double g = 2.004;
  Boundary boundary = Boundary::open;

  void validate() const;
  Vec3 couplings() const;
};

struct SpectrumED {
  Eigen::VectorXd eigenvalues;    // ascending, kelvin
  Eigen::MatrixXcd eigenvectors;  // columns
  double field = 0.0;
  Vec3 field_axis = kAxisY;
  ChainSpec spec;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  bool has_vectors() const { return eigenvectors.cols() == eigenvalues.size() && eigenvectors.size() > 0; }
};

Eigen::MatrixXcd build_hamiltonian(const ChainSpec& spec, double B, const Vec3& field_axis = kAxisY);

// Full Hermitian eigendecomposition; the result carries no chain metadata.
SpectrumED diagonalize(const Eigen::MatrixXcd& H);

SpectrumED solve_chain(const ChainSpec& spec, double B, const Vec3& field_axis = kAxisY);

// Per-spin quantities.  chi is dm/dh with h = g mu_B B / k_B, so chi has units 1/K
// and chi*T -> 1 for a free spin at high temperature.
double free_energy(const SpectrumED& s, double T);  // whole chain, kelvin
double specific_heat(const SpectrumED& s, double T);
double susceptibility(const SpectrumED& s, double T, const Vec3& probe_axis);
double magnetization(const SpectrumED& s, double T);
double correlator_xx(const SpectrumED& s, double T, int site);

struct ThermoResult {
  std::vector<double> temperatures;
  std::vector<double> specific_heat;
  std::vector<double> chi;
  std::vector<double> chi_T;
  std::vector<double> magnetization;
  std::vector<double> correlator_xx;  // averaged over bonds
};

// Evaluates every observable on a temperature grid, reusing the operator
// matrix elements across temperatures.
ThermoResult thermo_sweep(const SpectrumED& s, const std::vector<double>& T, const Vec3& probe_axis);

// Average over psi uniform in [0, pi] with Gauss-Legendre nodes.
ThermoResult powder_average_thermo(const ChainSpec& tmpl, const std::vector<double>& T, double B,
                                   int nodes = 64);

// Random-dilution chain-length weights P(n) ~ (1-p)^2 p^n for n = 1..n_max, normalized.
std::vector<double> dilution_weights(double p = 0.85, int n_max = 8);

struct CompositeModel {
  double dimer_J = 21.0;
  double chain_J = 0.7;
  double radical_fraction = 0.85;
  std::vector<double> length_weights = dilution_weights();  // index k -> n = k + 1
  double g = 2.004;
  double B = 0.0;
};

// chi*T of the composite sample in free-spin Curie units.
std::vector<double> composite_chiT(const CompositeModel& m, const std::vector<double>& T);
// Chain part only: sum_n w_n chiT_n(T).
std::vector<double> chain_mixture_chiT(const std::vector<double>& weights, double J, double g,
                                       const std::vector<double>& T, double B = 0.0);

// Converts chi*T in free-spin Curie units to emu K / (mol Oe).
double chiT_to_emu(double chiT, double g);

}  // namespace spinline
