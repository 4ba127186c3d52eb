#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "spinline/spinline.h"

namespace {

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> f(n);
  for (int k = 0; k < n; ++k) f[k] = lo + (hi - lo) * k / (n - 1);
  return f;
}

}  // namespace

TEST_CASE("version and constants") {
  CHECK(std::string(spl_version()) == "1.0.0");
  CHECK(std::string(spl_constant_set()) == "CODATA-2018");
  double f = 0;
  REQUIRE(spl_zeeman_frequency(0.5, 2.004, &f) == SPL_OK);
  CHECK(f == doctest::Approx(14.0241e9).epsilon(1e-5));
  double k = 0, back = 0;
  REQUIRE(spl_hz_to_kelvin(f, &k) == SPL_OK);
  REQUIRE(spl_kelvin_to_hz(k, &back) == SPL_OK);
  CHECK(back == doctest::Approx(f).epsilon(1e-15));
}

TEST_CASE("errors map to status codes with a message") {
  double f = 0;
  CHECK(spl_zeeman_frequency(-1.0, 2.004, &f) != SPL_OK);
  CHECK(std::strlen(spl_last_error()) > 0);
  CHECK(spl_zeeman_frequency(0.1, 2.004, nullptr) == SPL_ERR_INVALID_ARGUMENT);
  double eta = 0;
  CHECK(spl_visibility(0.0, 0.0, &eta) == SPL_ERR_DOMAIN);
  CHECK(spl_visibility(1.0, 1.0, &eta) == SPL_OK);
  CHECK(std::strlen(spl_last_error()) == 0);
  spl_sweep* s = nullptr;
  CHECK(spl_sweep_read("/nonexistent/file.csv", &s) == SPL_ERR_IO);
  CHECK(s == nullptr);
}

TEST_CASE("chain spectrum and thermodynamics") {
  spl_chain_params p;
  spl_chain_params_default(&p);
  p.n_spins = 2;
  p.J = 1.0;
  double ev[4];
  size_t count = 0;
  REQUIRE(spl_chain_spectrum(&p, 0.0, ev, 4, &count) == SPL_OK);
  CHECK(count == 4);
  CHECK(ev[0] == doctest::Approx(-3.0));
  CHECK(ev[3] == doctest::Approx(1.0));
  // a short buffer receives the lowest values and the full dimension
  double two[2];
  REQUIRE(spl_chain_spectrum(&p, 0.0, two, 2, &count) == SPL_OK);
  CHECK(count == 4);
  CHECK(two[0] == ev[0]);

  const double T[3] = {0.1, 1.0, 10.0};
  spl_thermo* t = nullptr;
  REQUIRE(spl_chain_thermo(&p, 0.0, T, 3, 0, &t) == SPL_OK);
  REQUIRE(spl_thermo_size(t) == 3);
  spl_thermo_row row;
  REQUIRE(spl_thermo_row_at(t, 1, &row) == SPL_OK);
  const double x = 4.0;
  CHECK(row.specific_heat == doctest::Approx(3 * x * x * std::exp(-x) / std::pow(1 + 3 * std::exp(-x), 2) / 2));
  CHECK(spl_thermo_row_at(t, 3, &row) != SPL_OK);
  spl_thermo_free(t);

  p.n_spins = 20;
  CHECK(spl_chain_thermo(&p, 0.0, T, 3, 0, &t) == SPL_ERR_INVALID_ARGUMENT);

  double w[8];
  REQUIRE(spl_dilution_weights(0.85, 8, w) == SPL_OK);
  CHECK(w[1] / w[0] == doctest::Approx(0.85));
  spl_composite c;
  spl_composite_default(&c);
  double hi = 0, emu = 0;
  const double Thi = 300.0;
  REQUIRE(spl_composite_chiT(&c, &Thi, 1, &hi) == SPL_OK);
  REQUIRE(spl_chiT_to_emu(hi, 2.004, &emu) == SPL_OK);
  CHECK(emu == doctest::Approx(0.319).epsilon(0.01));
}

TEST_CASE("mean field through the C layer") {
  spl_mf_params p;
  spl_mf_params_default(&p);
  p.epsilon = -0.086;
  p.psi = 1.5707963267948966;
  p.T = 0.01;
  spl_mf_state s;
  REQUIRE(spl_mf_solve(&p, &s) == SPL_OK);
  CHECK(s.phase == SPL_ANTIFERROMAGNETIC);
  CHECK(std::string(spl_phase_name(s.phase)) == "antiferromagnetic");
  CHECK(s.dtheta == doctest::Approx(3.141592653589793));
  double Bc = 0, TN = 0;
  REQUIRE(spl_mf_critical_field(&p, &Bc) == SPL_OK);
  REQUIRE(spl_mf_neel_temperature(&p, &TN) == SPL_OK);
  CHECK(TN == doctest::Approx(0.7));
  CHECK(Bc > 0.9);

  const double T[2] = {0.1, 1.0}, B[3] = {0.0, 0.3, 1.2};
  spl_phase_map* m = nullptr;
  REQUIRE(spl_mf_phase_map(&p, T, 2, B, 3, 2, &m) == SPL_OK);
  REQUIRE(spl_phase_map_size(m) == 6);
  double Tc = 0, Bcell = 0;
  REQUIRE(spl_phase_map_cell(m, 5, &Tc, &Bcell, &s) == SPL_OK);
  CHECK(Tc == 1.0);
  CHECK(Bcell == 1.2);
  CHECK(s.phase == SPL_PARAMAGNETIC);
  spl_phase_map_free(m);
  p.B = -1;
  CHECK(spl_mf_solve(&p, &s) == SPL_ERR_DOMAIN);
}

TEST_CASE("resonance modes through the C layer") {
  spl_mf_params p;
  spl_mf_params_default(&p);
  p.epsilon = -0.086;
  p.B = 0.5;
  p.T = 0.001;
  p.psi = 0.3;
  spl_modes m;
  REQUIRE(spl_llg_modes(&p, 0.0, &m) == SPL_OK);
  CHECK(m.count == 4);
  REQUIRE(m.has_selected);
  double exact = 0;
  REQUIRE(spl_llg_canted_exact(&p, &exact) == SPL_OK);
  CHECK(m.selected.re == doctest::Approx(exact).epsilon(1e-6));
  std::vector<spl_mode_node> nodes(16);
  REQUIRE(spl_powder_modes(&p, 0.0, 16, 1, nodes.data()) == SPL_OK);
  double w = 0;
  for (const auto& n : nodes) {
    w += n.weight;
    CHECK(n.ok);
  }
  CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("spectra through the C layer") {
  const auto f = grid(4.9e9, 5.1e9, 201);
  spl_spectrum* s = nullptr;
  REQUIRE(spl_paramagnetic_spectrum(f.data(), f.size(), 5e9, 12e6, 14e6, &s) == SPL_OK);
  REQUIRE(spl_spectrum_size(s) == 201);
  double fr = 0;
  spl_complex a, b;
  REQUIRE(spl_spectrum_point(s, 100, &fr, &a, &b) == SPL_OK);
  CHECK(fr == 5e9);
  CHECK(a.re == doctest::Approx(14.0 / 26));
  CHECK(b.re == doctest::Approx(a.re - 1.0));
  CHECK(std::string(spl_spectrum_model(s)) == "paramagnetic");
  CHECK(spl_spectrum_param_count(s) == 3);
  const char *key = nullptr, *val = nullptr;
  REQUIRE(spl_spectrum_param(s, 0, &key, &val) == SPL_OK);
  CHECK(std::string(key) == "Omega_Hz");
  spl_spectrum_free(s);

  spl_mf_params p;
  spl_mf_params_default(&p);
  p.epsilon = -0.086;
  p.B = 0.125;
  p.T = 0.01;
  spl_coupling_model m;
  spl_coupling_model_default(&m);
  spl_powder_options o;
  spl_powder_options_default(&o);
  o.nodes = 16;
  std::vector<double> pg(301);
  REQUIRE(spl_powder_grid(&p, &m, &o, pg.size(), pg.data()) == SPL_OK);
  REQUIRE(spl_powder_spectrum(pg.data(), pg.size(), &p, &m, &o, &s) == SPL_OK);
  CHECK(std::string(spl_spectrum_model(s)) == "powder_magnon");
  spl_spectrum_free(s);
  spl_line_stats st;
  REQUIRE(spl_powder_line_stats(&p, &m, &o, &st) == SPL_OK);
  CHECK(st.relative_shift > 0.0);

  const double T[2] = {0.01, 0.3};
  double eta[2];
  REQUIRE(spl_visibility_vs_temperature(SPL_MAGNON, T, 2, &p, &m, 0, &o, eta) == SPL_OK);
  CHECK(eta[0] == doctest::Approx(eta[1]));
}

TEST_CASE("sweep pipeline through the C layer") {
  spl_synth_config c;
  spl_synth_config_default(&c);
  c.T = 2.0;
  const auto f = grid(13.4e9, 14.4e9, 1001);
  const double B[2] = {0.485, 0.5};
  spl_sweep* s = nullptr;
  REQUIRE(spl_synthesize(&c, f.data(), f.size(), B, 2, &s) == SPL_OK);
  size_t nf = 0, nB = 0;
  int has11 = 0;
  REQUIRE(spl_sweep_dims(s, &nf, &nB, &has11) == SPL_OK);
  CHECK(nf == 1001);
  CHECK(nB == 2);
  CHECK(has11 == 1);

  char path[] = "/tmp/spinline_capi_XXXXXX";
  const int fd = mkstemp(path);
  REQUIRE(fd >= 0);
  REQUIRE(spl_sweep_write(s, path) == SPL_OK);
  spl_sweep* r = nullptr;
  REQUIRE(spl_sweep_read(path, &r) == SPL_OK);
  std::remove(path);
  CHECK(spl_sweep_temperature(r) == 2.0);
  spl_complex a, b;
  REQUIRE(spl_sweep_value(r, 1, 500, &a, nullptr) == SPL_OK);
  REQUIRE(spl_sweep_value(s, 1, 500, &b, nullptr) == SPL_OK);
  CHECK(a.re == b.re);
  CHECK(a.im == b.im);

  spl_normalized* n = nullptr;
  REQUIRE(spl_normalize_transmission(r, 0.5, -0.015, 2.004, &n) == SPL_OK);
  CHECK(spl_normalized_size(n) == 1001);
  CHECK(spl_normalized_warning_count(n) == 0);
  double fz = 0;
  spl_zeeman_frequency(0.485, 2.004, &fz);
  CHECK(spl_normalized_mirror(n) == doctest::Approx(fz));
  spl_fit_options o;
  spl_fit_options_default(&o);
  spl_fit_result fr;
  REQUIRE(spl_fit_normalized(n, &o, &fr) == SPL_OK);
  CHECK(fr.converged);
  CHECK(fr.eta == doctest::Approx(fr.G / (fr.G + fr.Gamma)).epsilon(1e-12));
  spl_zeeman_frequency(0.5, 2.004, &fz);
  CHECK(fr.Omega == doctest::Approx(fz).epsilon(1e-9));
  std::vector<double> amp(1001);
  REQUIRE(spl_normalize_reflection(r, 0.5, -0.015, 2.004, amp.data()) == SPL_OK);
  spl_normalized_free(n);
  CHECK(spl_normalize_transmission(r, 0.3, -0.015, 2.004, &n) == SPL_ERR_INVALID_ARGUMENT);
  spl_sweep_free(r);
  spl_sweep_free(s);

  spl_coupling_point pts[3] = {{0.1, 1.2, 0}, {0.3, 2.0, 0}, {0.5, 4.2, 0}};
  for (auto& q : pts) {
    double fq = 0, pol = 0;
    spl_zeeman_frequency(q.B, 2.004, &fq);
    spl_spin_polarization(fq, q.T, &pol);
    q.G = 0.00441 * fq * pol;
  }
  spl_coupling_fit cf;
  REQUIRE(spl_fit_coupling_law(pts, 3, 2.004, 1, &cf) == SPL_OK);
  CHECK(cf.alpha_N == doctest::Approx(0.00441).epsilon(1e-12));
  CHECK(cf.points == 3);
}

TEST_CASE("fit and metrics on plain arrays") {
  const auto f = grid(4.8e9, 5.2e9, 801);
  std::vector<spl_complex> s(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double d = 5e9 - f[k], G = 12e6, Ga = 14e6;
    // 1 - G / (G + Gamma + i d)
    const double den = (G + Ga) * (G + Ga) + d * d;
    s[k] = {1.0 - G * (G + Ga) / den, G * d / den};
  }
  spl_fit_options o;
  spl_fit_options_default(&o);
  spl_fit_result r;
  REQUIRE(spl_fit_spectrum(f.data(), s.data(), f.size(), &o, &r) == SPL_OK);
  CHECK(r.G == doctest::Approx(12e6).epsilon(1e-8));
  CHECK(r.errors[0] >= 0.0);
  spl_line_metrics m;
  REQUIRE(spl_extract_line_metrics(f.data(), s.data(), f.size(), &m) == SPL_OK);
  CHECK(m.fwhm == doctest::Approx(52e6).epsilon(1e-9));
  CHECK(spl_extract_line_metrics(f.data(), s.data(), 2, &m) == SPL_ERR_INVALID_ARGUMENT);
}
