#include "spinline/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spinline/constants.hpp"
#include "spinline/error.hpp"

namespace spinline {

namespace {

constexpr cplx I{0.0, 1.0};

void finish_s11(Spectrum& s) {
  s.s11.resize(s.s21.size());
  for (std::size_t k = 0; k < s.s21.size(); ++k) s.s11[k] = s.s21[k] - 1.0;
}

std::string num(double x) {
  std::ostringstream o;
  o.precision(10);
  o << x;
  return o.str();
}

double occupation_temperature(Statistics s, double T, double TN) {
  return (s == Statistics::magnon && T <= TN) ? TN : T;
}

// Selected mode of the isotropic (eps = 0) chain at the same B and T, in
// kelvin. Anisotropic modes are shifted and broadened relative to it, so
// damping effects shared with the isotropic line do not count as anisotropy.
cplx isotropic_mode(const MFParams& p, double gilbert) {
  const double Bk = p.field_kelvin();
  MFParams q = p;
  q.epsilon = 0.0;
  const MFState eq = solve_equilibrium(q);
  if (eq.phase == Phase::paramagnetic) return {Bk, -gilbert * Bk};
  const auto modes = resonance_modes(linearize(eq, q, gilbert));
  if (!modes.has_selected) return {Bk, -gilbert * Bk};
  return modes.selected;
}

}  // namespace

void CouplingModel::validate() const {
  require(alpha_N > 0.0, "alpha_N must be > 0");
  require(gamma_phi >= 0.0 && gamma_inh >= 0.0, "linewidth terms must be >= 0");
  require(N > 0.0, "N must be > 0");
}

double single_spin_rate(const CouplingModel& m, double f) { return m.alpha_N * f / m.N; }

double gamma_total(const CouplingModel& m, double f, double T) {
  require(f > 0.0, "gamma_total: frequency must be > 0", Errc::domain);
  const double nbar = T > 0.0 ? bose_occupation(f, T) : 0.0;
  return m.gamma_phi + m.gamma_inh + (2.0 * nbar + 1.0) * single_spin_rate(m, f);
}

double collective_coupling(const CouplingModel& m, double f, double T) {
  require(f > 0.0 && T > 0.0, "collective_coupling: need f > 0 and T > 0", Errc::domain);
  return m.alpha_N * f * spin_polarization(f, T);
}

double visibility(double G, double Gamma) {
  require(G + Gamma > 0.0, "visibility: G + Gamma must be > 0", Errc::domain);
  return G / (G + Gamma);
}

double resonator_equivalent(double G, double f) {
  require(G >= 0.0 && f > 0.0, "resonator_equivalent: need G >= 0 and f > 0", Errc::domain);
  return std::sqrt(G * f / std::numbers::pi);
}

Spectrum single_spin_s_params(const std::vector<double>& f, double Omega, double g, double Gamma) {
  require(!f.empty(), "empty frequency grid");
  require(g >= 0.0 && Gamma > 0.0, "single spin: need g >= 0 and Gamma > 0");
  Spectrum s;
  s.frequencies = f;
  s.model = "single_spin";
  for (double w : f) s.s21.push_back(1.0 - g / (I * (Omega - w) + Gamma));
  finish_s11(s);
  s.params = {{"Omega_Hz", num(Omega)}, {"g_Hz", num(g)}, {"Gamma_Hz", num(Gamma)}};
  return s;
}

Spectrum single_spin_s_params(const std::vector<double>& f, double Omega, const CouplingModel& m, double T) {
  m.validate();
  const double g = single_spin_rate(m, Omega) * spin_polarization(Omega, T);
  Spectrum s = single_spin_s_params(f, Omega, g, gamma_total(m, Omega, T));
  s.T = T;
  return s;
}

Spectrum ensemble_s_params(const std::vector<double>& f, const std::vector<SpinLine>& spins, double Gamma) {
  require(!f.empty(), "empty frequency grid");
  require(Gamma > 0.0, "ensemble: Gamma must be > 0");
  for (const auto& sp : spins) require(sp.g >= 0.0 && sp.count >= 0.0, "ensemble: couplings and counts must be >= 0");
  Spectrum s;
  s.frequencies = f;
  s.model = "ensemble";
  for (double w : f) {
    cplx sum = 0.0;
    for (const auto& sp : spins) {
      // theta_j = S11 / S21 of one spin
      const cplx den = I * (sp.Omega - w) + Gamma;
      sum += -sp.count * sp.g / (den - sp.g);
    }
    s.s21.push_back(1.0 / (1.0 - sum));
    s.s11.push_back(sum / (1.0 - sum));
  }
  s.params = {{"spins", std::to_string(spins.size())}, {"Gamma_Hz", num(Gamma)}};
  return s;
}

Spectrum paramagnetic_s_params(const std::vector<double>& f, double Omega, double G, double Gamma) {
  require(!f.empty(), "empty frequency grid");
  require(G >= 0.0 && Gamma >= 0.0 && G + Gamma > 0.0, "paramagnetic: need G, Gamma >= 0, not both 0");
  Spectrum s;
  s.frequencies = f;
  s.model = "paramagnetic";
  for (double w : f) {
    const cplx r = G / (G + Gamma + I * (Omega - w));
    s.s21.push_back(1.0 - r);
    s.s11.push_back(-r);
  }
  s.params = {{"Omega_Hz", num(Omega)}, {"G_Hz", num(G)}, {"Gamma_Hz", num(Gamma)}};
  return s;
}

const char* statistics_name(Statistics s) { return s == Statistics::magnon ? "magnon" : "classical_mf"; }

PowderLines powder_lines(const MFParams& p, const CouplingModel& m, const PowderOptions& opt) {
  m.validate();
  p.validate();
  require(p.B > 0.0, "powder: field must be > 0", Errc::domain);
  require(p.T > 0.0, "powder: temperature must be > 0", Errc::domain);
  PowderLines L;
  const double fz = zeeman_frequency(p.B, p.g);
  L.zeeman = fz;
  L.Gamma = gamma_total(m, fz, p.T);
  L.G = collective_coupling(m, fz, occupation_temperature(opt.statistics, p.T, p.J));
  L.gilbert = opt.gilbert >= 0.0 ? opt.gilbert : gilbert_from_linewidth(L.Gamma, p.B, p.g);
  if (p.T > p.J) {
    L.ordered = false;
    L.omega = {fz};
    L.gamma = {L.Gamma};
    L.weight = {1.0};
    return L;
  }
  L.ordered = true;
  const double Bk = p.field_kelvin();
  const cplx iso = isotropic_mode(p, L.gilbert);
  for (const auto& n : powder_mode_distribution(p, L.gilbert, opt.nodes, opt.jobs)) {
    if (!n.ok) fail(Errc::no_convergence, "powder node at psi=" + num(n.psi) + " failed: " + n.flags);
    const bool para = n.phase == Phase::paramagnetic;
    const cplx ref = para ? cplx(Bk, -L.gilbert * Bk) : iso;
    L.omega.push_back(kelvin_to_hz(n.omega.real() - ref.real() + Bk));
    // only damping beyond the isotropic mode is added to Gamma
    L.gamma.push_back(L.Gamma + kelvin_to_hz(std::max(0.0, std::abs(n.omega.imag()) - std::abs(ref.imag()))));
    L.weight.push_back(n.weight);
  }
  return L;
}

PowderLineStats powder_line_stats(const PowderLines& L) {
  PowderLineStats st;
  double wsum = 0.0;
  for (std::size_t k = 0; k < L.omega.size(); ++k) {
    wsum += L.weight[k];
    st.center += L.weight[k] * L.omega[k];
    st.excess_broadening += L.weight[k] * (L.gamma[k] - L.Gamma);
  }
  st.center /= wsum;
  st.excess_broadening /= wsum;
  for (std::size_t k = 0; k < L.omega.size(); ++k) st.spread += L.weight[k] * std::pow(L.omega[k] - st.center, 2);
  st.spread = std::sqrt(st.spread / wsum);
  st.relative_shift = st.center / L.zeeman - 1.0;
  return st;
}

Spectrum powder_spinwave_s21(const std::vector<double>& f, const MFParams& p, const CouplingModel& m,
                             const PowderOptions& opt) {
  require(!f.empty(), "empty frequency grid");
  const PowderLines L = powder_lines(p, m, opt);
  Spectrum s;
  if (!L.ordered) {
    s = paramagnetic_s_params(f, L.zeeman, L.G, L.Gamma);
  } else {
    s.frequencies = f;
    for (double x : f) {
      cplx sum = 0.0;
      for (std::size_t k = 0; k < L.omega.size(); ++k) sum += L.weight[k] * L.G / (L.gamma[k] + I * (L.omega[k] - x));
      s.s21.push_back(1.0 / (1.0 + sum));
    }
    finish_s11(s);
  }
  s.T = p.T;
  s.B = p.B;
  s.model = std::string("powder_") + statistics_name(opt.statistics);
  s.params = {{"J_K", num(p.J)},           {"epsilon", num(p.epsilon)},     {"g", num(p.g)},
              {"G_Hz", num(L.G)},          {"Gamma_Hz", num(L.Gamma)},      {"gilbert", num(L.gilbert)},
              {"nodes", std::to_string(opt.nodes)}};
  return s;
}

std::vector<double> powder_grid(const MFParams& p, const CouplingModel& m, const PowderOptions& opt, int points) {
  require(points >= 3, "powder_grid: need at least 3 points");
  const PowderLines L = powder_lines(p, m, opt);
  double lo = L.zeeman, hi = L.zeeman, width = L.Gamma + L.G;
  for (std::size_t k = 0; k < L.omega.size(); ++k) {
    lo = std::min(lo, L.omega[k]);
    hi = std::max(hi, L.omega[k]);
    width = std::max(width, L.gamma[k] + L.G);
  }
  lo = std::max(lo - 20.0 * width, 0.0);
  hi += 20.0 * width;
  std::vector<double> f(points);
  for (int k = 0; k < points; ++k) f[k] = lo + (hi - lo) * k / (points - 1);
  return f;
}

std::vector<double> visibility_vs_temperature(Statistics s, const std::vector<double>& T, const MFParams& p,
                                              const CouplingModel& m, bool broadening, const PowderOptions& opt) {
  require(!T.empty(), "empty temperature grid");
  const double fz = zeeman_frequency(p.B, p.g);
  std::vector<double> out;
  for (double t : T) {
    if (!broadening) {
      const double G = collective_coupling(m, fz, occupation_temperature(s, t, p.J));
      out.push_back(visibility(G, gamma_total(m, fz, t)));
      continue;
    }
    MFParams q = p;
    q.T = t;
    PowderOptions o = opt;
    o.statistics = s;
    const Spectrum sp = powder_spinwave_s21(powder_grid(q, m, o, 20001), q, m, o);
    double amin = 1.0;
    for (const cplx& z : sp.s21) amin = std::min(amin, std::abs(z));
    out.push_back(1.0 - amin);
  }
  return out;
}

}  // namespace spinline
