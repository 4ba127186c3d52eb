#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spinline/transmission.hpp"

namespace spinline {

// Raw VNA sweep: one complex trace per field on a shared frequency grid.
struct RawSweep {
  std::vector<double> frequencies;  // Hz, ascending
  std::vector<double> fields;       // T, ascending
  std::vector<std::vector<cplx>> s21;
  std::vector<std::vector<cplx>> s11;  // empty when the sweep has no reflection data
  double temperature = 0.0;            // K, 0 when unknown

  bool has_s11() const { return !s11.empty(); }
  void validate() const;
  std::size_t field_index(double B) const;  // throws when absent
};

// Long-format CSV: f_GHz, B_T, re_s21, im_s21[, re_s11, im_s11]; '#' lines are
// comments and "# T_K=<value>" sets the temperature.
RawSweep read_raw_sweep(std::istream& in);
RawSweep read_raw_sweep(const std::string& path);
void write_raw_sweep(std::ostream& out, const RawSweep& s);

struct NormalizedSpectrum {
  std::vector<double> frequencies;
  std::vector<cplx> s21;
  std::vector<bool> valid;
  double B = 0.0, dB = 0.0, T = 0.0, g = 2.004;
  double mirror_center = 0.0;  // Hz, where the reference trace resonates
  std::vector<std::string> warnings;
};

struct AmplitudeSpectrum {
  std::vector<double> frequencies;
  std::vector<double> amplitude;
  std::vector<bool> valid;
  double mirror_center = 0.0;
};

NormalizedSpectrum normalize_transmission(const RawSweep& s, double B, double dB, double g = 2.004);
AmplitudeSpectrum normalize_reflection(const RawSweep& s, double B, double dB, double g = 2.004);

struct FitOptions {
  std::optional<std::pair<double, double>> window;  // Hz
  std::optional<std::array<double, 3>> initial;      // G, Gamma, Omega in Hz
  bool amplitude_only = false;
  // Model the resonance carried by the reference trace (normalized input only).
  bool reference_model = true;
  int max_iter = 200;
  double rel_tol = 1e-10;
};

struct FitResult {
  double G = 0.0, Gamma = 0.0, Omega = 0.0, eta = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;
  int points = 0;
  std::vector<std::string> warnings;

  std::array<double, 3> errors() const;
};

FitResult fit_resonance(const NormalizedSpectrum& s, const FitOptions& opt = {});
// Plain complex spectrum without a reference trace.
FitResult fit_resonance(const std::vector<double>& f, const std::vector<cplx>& s21, const FitOptions& opt = {});

struct LineMetrics {
  double center = 0.0, fwhm = 0.0, visibility = 0.0;
};
LineMetrics extract_line_metrics(const std::vector<double>& f, const std::vector<cplx>& s21);

struct CouplingPoint {
  double B, T, G;  // T, K, Hz
};
enum class Weighting { uniform, relative };
struct CouplingFit {
  double alpha_N = 0.0;
  double uncertainty = 0.0;  // one standard error, NaN for a single point
  double ci95 = 0.0;         // half-width of the 95% interval, NaN for a single point
  double residual = 0.0;     // weighted rms
  int points = 0;
};
CouplingFit fit_coupling_law(const std::vector<CouplingPoint>& pts, double g = 2.004,
                             Weighting w = Weighting::relative);

// Synthetic raw sweeps: model spectra times a smooth background with three
// ripples and a cable delay, plus seeded Gaussian noise on Re and Im.
struct Background {
  double amplitude = 0.8;
  std::array<double, 3> ripple_amp{0.10, 0.05, 0.03};
  std::array<double, 3> ripple_period{0.31e9, 0.13e9, 0.057e9};  // Hz
  std::array<double, 3> ripple_phase{0.3, 1.1, 2.0};
  double delay = 5e-9;          // s
  cplx reflection{0.05, -0.02};  // additive reflection background
};

struct SynthConfig {
  std::vector<double> frequencies;
  std::vector<double> fields;
  double T = 2.0;
  CouplingModel model;
  std::string line = "paramagnetic";  // or "powder"
  MFParams chain;                     // J, epsilon, g used by the powder line
  Background background;
  bool unit_background = false;
  double noise = 0.0;
  std::uint64_t seed = 1;
  bool include_s11 = true;
  int nodes = 64;
};

RawSweep synthesize_sweep(const SynthConfig& c);

}  // namespace spinline
