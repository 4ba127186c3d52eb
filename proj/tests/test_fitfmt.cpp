#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "spinline/constants.hpp"
#include "spinline/error.hpp"
#include "spinline/fitfmt.hpp"

using namespace spinline;

namespace {

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> f(n);
  for (int k = 0; k < n; ++k) f[k] = lo + (hi - lo) * k / (n - 1);
  return f;
}

cplx eq1(double G, double Gamma, double Omega, double w) { return 1.0 - G / (G + Gamma + cplx(0, 1) * (Omega - w)); }

std::vector<cplx> eq1_trace(const std::vector<double>& f, double G, double Gamma, double Omega) {
  std::vector<cplx> s;
  for (double w : f) s.push_back(eq1(G, Gamma, Omega, w));
  return s;
}

SynthConfig two_field_config(double B, double dB, double noise = 0.0, std::uint64_t seed = 1) {
  SynthConfig c;
  const double fz = zeeman_frequency(B, 2.004), fr = zeeman_frequency(B + dB, 2.004);
  c.frequencies = grid(std::min(fz, fr) - 300e6, std::max(fz, fr) + 300e6, 3001);
  c.fields = {std::min(B, B + dB), std::max(B, B + dB)};
  c.T = 2.0;
  c.noise = noise;
  c.seed = seed;
  return c;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

}  // namespace

TEST_CASE("raw sweep CSV round trip") {
  SynthConfig c = two_field_config(0.5, -0.015, 0.01, 9);
  c.frequencies = grid(13.5e9, 14.5e9, 101);
  const RawSweep s = synthesize_sweep(c);
  std::stringstream io;
  write_raw_sweep(io, s);
  const RawSweep r = read_raw_sweep(io);
  REQUIRE(r.fields.size() == s.fields.size());
  REQUIRE(r.frequencies.size() == s.frequencies.size());
  CHECK(r.temperature == s.temperature);
  CHECK(r.has_s11());
  for (std::size_t k = 0; k < s.frequencies.size(); ++k)
    CHECK(r.frequencies[k] == doctest::Approx(s.frequencies[k]).epsilon(1e-14));
  for (std::size_t b = 0; b < s.fields.size(); ++b) {
    CHECK(r.fields[b] == doctest::Approx(s.fields[b]).epsilon(1e-12));
    for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
      CHECK(r.s21[b][k] == s.s21[b][k]);
      CHECK(r.s11[b][k] == s.s11[b][k]);
    }
  }
  CHECK(r.field_index(0.485) == 0);
  CHECK_THROWS(r.field_index(0.3));
}

TEST_CASE("raw sweep reader accepts unsorted rows and rejects bad input") {
  std::istringstream ok("# comment\n# T_K=1.5\nB_T,f_GHz,re_s21,im_s21\n0.2,2.0,1,0\n0.1,1.0,1,0\n0.1,2.0,0.5,0.1\n0.2,1.0,1,0\n");
  const RawSweep s = read_raw_sweep(ok);
  CHECK(s.temperature == 1.5);
  CHECK(!s.has_s11());
  REQUIRE(s.fields.size() == 2);
  CHECK(s.fields[0] == 0.1);
  CHECK(s.frequencies[1] == 2e9);
  CHECK(s.s21[0][1] == cplx(0.5, 0.1));

  auto read = [](const std::string& text) {
    std::istringstream in(text);
    read_raw_sweep(in);
  };
  CHECK(code_of([&] { read("f_GHz,B_T,re_s21\n1,0.1,1\n"); }) == Errc::io);
  CHECK(code_of([&] { read("f_GHz,B_T,re_s21,im_s21\n1,0.1,x,0\n"); }) == Errc::io);
  CHECK(code_of([&] { read("f_GHz,B_T,re_s21,im_s21\n1,0.1,1,0\n1,0.2,1,0\n2,0.2,1,0\n"); }) == Errc::io);
  CHECK(code_of([&] { read("f_GHz,B_T,re_s21,im_s21\n1,0.1,1,0\n2,0.1,1,0\n1,0.2,1,0\n3,0.2,1,0\n"); }) == Errc::io);
  CHECK(code_of([&] { read("f_GHz,B_T,re_s21,im_s21\n"); }) == Errc::io);
  CHECK(code_of([&] { read("f_GHz,B_T,re_s21,im_s21\n1,0.1,1\n"); }) == Errc::io);
  CHECK(code_of([&] { read_raw_sweep(std::string("/nonexistent/sweep.csv")); }) == Errc::io);
}

TEST_CASE("transmission normalization is the exact quotient") {
  const double B = 0.5, dB = -0.015;
  SynthConfig c = two_field_config(B, dB);
  const RawSweep s = synthesize_sweep(c);
  const NormalizedSpectrum n = normalize_transmission(s, B, dB);
  const double fz = zeeman_frequency(B, 2.004), fr = zeeman_frequency(B + dB, 2.004);
  const double G = collective_coupling(c.model, fz, c.T), Gr = collective_coupling(c.model, fr, c.T);
  const double Gam = gamma_total(c.model, fz, c.T), Gamr = gamma_total(c.model, fr, c.T);
  CHECK(n.mirror_center == doctest::Approx(fr).epsilon(1e-15));
  CHECK(n.warnings.empty());
  std::size_t peak = 0;
  for (std::size_t k = 0; k < n.frequencies.size(); ++k) {
    REQUIRE(n.valid[k]);
    const double w = n.frequencies[k];
    CHECK(std::abs(n.s21[k] - eq1(G, Gam, fz, w) / eq1(Gr, Gamr, fr, w)) <= 1e-12);
    if (std::abs(n.s21[k]) > std::abs(n.s21[peak])) peak = k;
  }
  // the upward mirror peak sits on the reference resonance
  CHECK(std::abs(n.frequencies[peak] - fr) <= n.frequencies[1] - n.frequencies[0]);
  CHECK(std::abs(n.s21[peak]) > 1.5);

  c.model.alpha_N = 1e-300;
  const NormalizedSpectrum flat = normalize_transmission(synthesize_sweep(c), B, dB);
  for (const cplx& z : flat.s21) CHECK(std::abs(z - 1.0) <= 1e-14);

  CHECK_THROWS(normalize_transmission(s, B, 0.0));
  CHECK_THROWS(normalize_transmission(s, B, 0.1));
  // an offset inside the linewidth is flagged
  SynthConfig near = two_field_config(0.5, -1e-5);
  CHECK(!normalize_transmission(synthesize_sweep(near), 0.5, -1e-5).warnings.empty());
}

TEST_CASE("vanishing reference points are marked invalid") {
  RawSweep s;
  s.frequencies = {1e9, 2e9, 3e9};
  s.fields = {0.1, 0.2};
  s.s21 = {{1.0, 1.0, 1.0}, {1.0, 0.0, 1.0}};
  const auto n = normalize_transmission(s, 0.1, 0.1);
  CHECK(n.valid[0]);
  CHECK(!n.valid[1]);
  CHECK(std::isnan(n.s21[1].real()));
}

TEST_CASE("reflection normalization cancels the additive background") {
  const double B = 0.5, dB = -0.015;
  SynthConfig c = two_field_config(B, dB);
  const AmplitudeSpectrum a = normalize_reflection(synthesize_sweep(c), B, dB);
  c.background.reflection = {0.3, 0.2};
  const AmplitudeSpectrum b = normalize_reflection(synthesize_sweep(c), B, dB);
  const NormalizedSpectrum n = normalize_transmission(synthesize_sweep(c), B, dB);
  for (std::size_t k = 0; k < a.amplitude.size(); ++k) {
    CHECK(a.amplitude[k] == doctest::Approx(b.amplitude[k]).epsilon(1e-12));
    CHECK(b.amplitude[k] == doctest::Approx(std::abs(1.0 - n.s21[k])).epsilon(1e-10).scale(1e-12));
  }
  c.include_s11 = false;
  CHECK_THROWS(normalize_reflection(synthesize_sweep(c), B, dB));
}

TEST_CASE("noiseless Lorentzian is recovered") {
  const double G = 12e6, Gamma = 14e6, Omega = 14e9;
  const auto f = grid(Omega - 300e6, Omega + 300e6, 1201);
  const FitResult r = fit_resonance(f, eq1_trace(f, G, Gamma, Omega));
  CHECK(r.converged);
  CHECK(r.G == doctest::Approx(G).epsilon(1e-8));
  CHECK(r.Gamma == doctest::Approx(Gamma).epsilon(1e-8));
  CHECK(r.Omega == doctest::Approx(Omega).epsilon(1e-8));
  CHECK(r.eta == doctest::Approx(r.G / (r.G + r.Gamma)).epsilon(1e-12));
  CHECK(std::isfinite(r.residual_rms));
  CHECK(r.points >= 20);

  FitOptions amp;
  amp.amplitude_only = true;
  const FitResult a = fit_resonance(f, eq1_trace(f, G, Gamma, Omega), amp);
  CHECK(a.G == doctest::Approx(G).epsilon(1e-6));
  CHECK(a.Gamma == doctest::Approx(Gamma).epsilon(1e-6));
  CHECK(a.Omega == doctest::Approx(Omega).epsilon(1e-8));
}

TEST_CASE("fit is invariant under rescaling of the frequency axis") {
  const double G = 12e6, Gamma = 14e6, Omega = 14e9;
  for (double s : {0.5, 2.0}) {
    const auto f = grid(s * (Omega - 300e6), s * (Omega + 300e6), 1201);
    const FitResult r = fit_resonance(f, eq1_trace(f, s * G, s * Gamma, s * Omega));
    CHECK(r.G == doctest::Approx(s * G).epsilon(1e-8));
    CHECK(r.Gamma == doctest::Approx(s * Gamma).epsilon(1e-8));
    CHECK(r.Omega == doctest::Approx(s * Omega).epsilon(1e-10));
  }
}

TEST_CASE("noisy fits cover the truth within three standard errors") {
  const double G = 12e6, Gamma = 14e6, Omega = 14e9;
  const auto f = grid(Omega - 300e6, Omega + 300e6, 1201);
  std::normal_distribution<double> nd(0.0, 0.01);
  int inside[3] = {0, 0, 0};
  for (int seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    auto s = eq1_trace(f, G, Gamma, Omega);
    for (cplx& z : s) z += cplx(nd(rng), nd(rng));
    const FitResult r = fit_resonance(f, s);
    REQUIRE(r.converged);
    const auto e = r.errors();
    inside[0] += std::abs(r.G - G) <= 3 * e[0];
    inside[1] += std::abs(r.Gamma - Gamma) <= 3 * e[1];
    inside[2] += std::abs(r.Omega - Omega) <= 3 * e[2];
  }
  for (int j = 0; j < 3; ++j) CHECK(inside[j] >= 97);
}

TEST_CASE("fit edge cases") {
  const auto f = grid(13.7e9, 14.3e9, 601);
  const FitResult flat = fit_resonance(f, std::vector<cplx>(f.size(), 1.0));
  CHECK(!flat.converged);
  CHECK(flat.G == 0.0);
  CHECK(!flat.warnings.empty());

  const auto few = grid(13.99e9, 14.01e9, 15);
  CHECK_THROWS(fit_resonance(few, eq1_trace(few, 12e6, 14e6, 14e9)));
  CHECK_THROWS(fit_resonance(f, std::vector<cplx>(3, 1.0)));
}

TEST_CASE("normalized fit with the reference model") {
  const double B = 0.5, dB = -0.015;
  const SynthConfig c = two_field_config(B, dB);
  const NormalizedSpectrum n = normalize_transmission(synthesize_sweep(c), B, dB);
  const double fz = zeeman_frequency(B, 2.004);
  const FitResult r = fit_resonance(n);
  CHECK(r.converged);
  CHECK(r.G == doctest::Approx(collective_coupling(c.model, fz, c.T)).epsilon(1e-8));
  CHECK(r.Gamma == doctest::Approx(gamma_total(c.model, fz, c.T)).epsilon(1e-8));
  CHECK(r.Omega == doctest::Approx(fz).epsilon(1e-10));
  CHECK(r.warnings.empty());

  FitOptions w;
  w.window = std::make_pair(n.mirror_center - 100e6, fz + 100e6);
  const FitResult m = fit_resonance(n, w);
  bool warned = false;
  for (const auto& s : m.warnings) warned = warned || s.find("mirror") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("line metrics of a Lorentzian") {
  const double G = 12e6, Gamma = 14e6, Omega = 14e9;
  const auto f = grid(Omega - 200e6, Omega + 200e6, 801);
  const LineMetrics m = extract_line_metrics(f, eq1_trace(f, G, Gamma, Omega));
  CHECK(m.center == doctest::Approx(Omega).epsilon(1e-12));
  CHECK(m.visibility == doctest::Approx(visibility(G, Gamma)).epsilon(1e-10));
  CHECK(m.fwhm == doctest::Approx(2 * (G + Gamma)).epsilon(1e-9));

  // off-grid center: parabolic refinement lands within a small fraction of a step
  const LineMetrics o = extract_line_metrics(f, eq1_trace(f, G, Gamma, Omega + 0.3 * (f[1] - f[0])));
  CHECK(std::abs(o.center - (Omega + 0.3 * (f[1] - f[0]))) < 0.05 * (f[1] - f[0]));
  CHECK(o.fwhm == doctest::Approx(2 * (G + Gamma)).epsilon(1e-9));

  // two exactly tied dips: the lower one wins
  const std::vector<double> fx = grid(1e9, 9e9, 9);
  const std::vector<cplx> two{1.0, 0.5, 0.2, 0.5, 1.0, 0.5, 0.2, 0.5, 1.0};
  CHECK(extract_line_metrics(fx, two).center == doctest::Approx(3e9));

  const auto edge = grid(Omega, Omega + 200e6, 401);
  CHECK(code_of([&] { extract_line_metrics(edge, eq1_trace(edge, G, Gamma, Omega)); }) == Errc::domain);
}

TEST_CASE("coupling law fit") {
  const double a = 0.00441, g = 2.004;
  std::vector<CouplingPoint> pts;
  for (double B : {0.1, 0.2, 0.3, 0.4, 0.5})
    for (double T : {1.2, 2.0, 3.0, 4.2}) {
      const double f = zeeman_frequency(B, g);
      pts.push_back({B, T, a * f * std::tanh(hz_to_kelvin(f) / (2 * T))});
    }
  for (Weighting w : {Weighting::relative, Weighting::uniform}) {
    const CouplingFit r = fit_coupling_law(pts, g, w);
    CHECK(r.alpha_N == doctest::Approx(a).epsilon(1e-10));
    CHECK(r.points == 20);
    CHECK(r.uncertainty < 1e-12);
  }
  const CouplingFit one = fit_coupling_law({pts[3]}, g);
  CHECK(one.alpha_N == doctest::Approx(a).epsilon(1e-14));
  CHECK(one.residual <= 1e-15);
  CHECK(std::isnan(one.uncertainty));
  CHECK(std::isnan(one.ci95));

  CHECK_THROWS(fit_coupling_law({}, g));
  CHECK_THROWS(fit_coupling_law({{0.1, 1.0, 0.0}, {0.2, 1.0, 0.0}}, g));
  CHECK_THROWS(fit_coupling_law({{0.0, 1.0, 1e6}}, g));
}

TEST_CASE("coupling law confidence interval covers the truth under 5% noise") {
  const double a = 0.00441, g = 2.004;
  int covered = 0;
  const int trials = 200;
  for (int seed = 1; seed <= trials; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 0.05);
    std::vector<CouplingPoint> pts;
    for (double B : {0.1, 0.2, 0.3, 0.4, 0.5})
      for (double T : {1.2, 2.0, 3.0, 4.2}) {
        const double f = zeeman_frequency(B, g);
        pts.push_back({B, T, a * f * std::tanh(hz_to_kelvin(f) / (2 * T)) * (1 + nd(rng))});
      }
    const CouplingFit r = fit_coupling_law(pts, g);
    covered += std::abs(r.alpha_N - a) <= r.ci95;
  }
  MESSAGE("95% interval coverage: " << covered << "/" << trials);
  CHECK(covered >= 180);
}

TEST_CASE("synthesis") {
  SynthConfig c = two_field_config(0.5, -0.015, 0.01, 42);
  c.frequencies = grid(13.5e9, 14.5e9, 201);
  const RawSweep a = synthesize_sweep(c), b = synthesize_sweep(c);
  for (std::size_t k = 0; k < a.frequencies.size(); ++k) CHECK(a.s21[1][k] == b.s21[1][k]);
  c.seed = 43;
  const RawSweep d = synthesize_sweep(c);
  CHECK(d.s21[1][0] != a.s21[1][0]);

  c.noise = 0.0;
  c.unit_background = true;
  const RawSweep u = synthesize_sweep(c);
  const double fz = zeeman_frequency(0.5, 2.004);
  const auto m = paramagnetic_s_params(c.frequencies, fz, collective_coupling(c.model, fz, c.T), gamma_total(c.model, fz, c.T));
  for (std::size_t k = 0; k < c.frequencies.size(); ++k) {
    CHECK(u.s21[1][k] == m.s21[k]);
    CHECK(u.s11[1][k] == m.s11[k]);
  }
  c.line = "nonsense";
  CHECK_THROWS(synthesize_sweep(c));
  c.line = "paramagnetic";
  c.noise = -1;
  CHECK_THROWS(synthesize_sweep(c));
}

TEST_CASE("powder synthesis uses the chain parameters") {
  SynthConfig c;
  c.frequencies = grid(3.0e9, 4.5e9, 801);
  c.fields = {0.125};
  c.T = 0.01;
  c.line = "powder";
  c.chain.epsilon = -0.086;
  c.unit_background = true;
  c.nodes = 32;
  const RawSweep s = synthesize_sweep(c);
  MFParams p = c.chain;
  p.B = 0.125;
  p.T = 0.01;
  PowderOptions o;
  o.nodes = 32;
  const auto m = powder_spinwave_s21(c.frequencies, p, c.model, o);
  for (std::size_t k = 0; k < c.frequencies.size(); ++k) CHECK(s.s21[0][k] == m.s21[k]);
}
