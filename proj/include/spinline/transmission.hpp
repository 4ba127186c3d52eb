#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "spinline/llg.hpp"
#include "spinline/meanfield.hpp"

namespace spinline {

// All rates and frequencies here are linear (Hz, i.e. omega / 2 pi).
struct CouplingModel {
  double alpha_N = 0.00441;   // 2 pi alpha N
  double gamma_phi = 4.8e6;   // intrinsic dephasing
  double gamma_inh = 9.2e6;   // phenomenological inhomogeneous broadening
  double N = 5e16;

  void validate() const;
};

struct Spectrum {
  std::vector<double> frequencies;
  std::vector<cplx> s21;
  std::vector<cplx> s11;
  double T = 0.0;
  double B = 0.0;
  std::string model;
  std::vector<std::pair<std::string, std::string>> params;
};

// 2 pi lambda^2 for one spin (Hz).
double single_spin_rate(const CouplingModel& m, double f);
double gamma_total(const CouplingModel& m, double f, double T);
double collective_coupling(const CouplingModel& m, double f, double T);
double visibility(double G, double Gamma);
double resonator_equivalent(double G, double f);

// One spin with coupling g = 2 pi lambda^2 <sigma_z> and decay Gamma.
Spectrum single_spin_s_params(const std::vector<double>& f, double Omega, double g, double Gamma);
Spectrum single_spin_s_params(const std::vector<double>& f, double Omega, const CouplingModel& m, double T);

// One emitter, or `count` identical emitters composed in series.
struct SpinLine {
  double Omega;
  double g;
  double count = 1.0;
};
Spectrum ensemble_s_params(const std::vector<double>& f, const std::vector<SpinLine>& spins, double Gamma);

Spectrum paramagnetic_s_params(const std::vector<double>& f, double Omega, double G, double Gamma);

enum class Statistics { magnon, classical_mf };
const char* statistics_name(Statistics s);

struct PowderOptions {
  int nodes = 64;
  Statistics statistics = Statistics::magnon;
  double gilbert = -1.0;  // < 0: derived from the paramagnetic linewidth
  int jobs = 1;
};

// Effective Lorentzian lines of the orientation average, frequencies in Hz.
// Ordered-phase modes are referenced to the isotropic (eps = 0) mode at the
// same B and T; only damping beyond it is added to Gamma.
struct PowderLines {
  std::vector<double> omega, gamma, weight;
  double G = 0.0, Gamma = 0.0, zeeman = 0.0, gilbert = 0.0;
  bool ordered = false;
};
PowderLines powder_lines(const MFParams& p, const CouplingModel& m, const PowderOptions& opt = {});

// Weighted moments of the effective lines: center shift relative to the
// Zeeman line, rms spread of the centers, and the mean damping added to Gamma.
struct PowderLineStats {
  double center = 0.0, relative_shift = 0.0;
  double spread = 0.0, excess_broadening = 0.0;
};
PowderLineStats powder_line_stats(const PowderLines& L);

// Orientation-averaged transmission of the chain ensemble.  Above the ordering
// temperature J this is the paramagnetic line; below it each orientation
// contributes its spin-wave frequency, with the occupation frozen at J in magnon mode.
Spectrum powder_spinwave_s21(const std::vector<double>& f, const MFParams& p, const CouplingModel& m,
                             const PowderOptions& opt = {});

// Frequency grid wide enough to hold every orientation's line at (T, B).
std::vector<double> powder_grid(const MFParams& p, const CouplingModel& m, const PowderOptions& opt,
                                int points = 4001);

// On-resonance visibility versus temperature.  Without broadening each point is
// G/(G+Gamma) of the paramagnetic line; with broadening it is 1 - min|S21| of
// the powder spectrum.
std::vector<double> visibility_vs_temperature(Statistics s, const std::vector<double>& T, const MFParams& p,
                                              const CouplingModel& m, bool broadening,
                                              const PowderOptions& opt = {});

}  // namespace spinline
