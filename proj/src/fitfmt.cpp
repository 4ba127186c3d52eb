#include "spinline/fitfmt.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "spinline/constants.hpp"
#include "spinline/error.hpp"

namespace spinline {

namespace {

constexpr cplx I{0.0, 1.0};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(Errc::io, "raw sweep line " + std::to_string(line) + ": cannot parse '" + s + "'");
  return v;
}

cplx eq1(double G, double Gamma, double Omega, double w) { return 1.0 - G / (G + Gamma + I * (Omega - w)); }

// coupling-law ratio G(Omega + d) / G(Omega) at temperature T
double coupling_ratio(double Omega, double d, double T) {
  const double a = Omega + d;
  if (Omega <= 0.0 || a <= 0.0) return 0.0;
  if (T > 0.0) return a * std::tanh(hz_to_kelvin(a) / (2.0 * T)) / (Omega * std::tanh(hz_to_kelvin(Omega) / (2.0 * T)));
  return (a * a) / (Omega * Omega);
}

struct Problem {
  std::vector<double> f;
  std::vector<cplx> data;
  bool amplitude_only = false;
  bool reference = false;
  double shift = 0.0;  // reference resonance offset, Hz
  double T = 0.0;

  cplx model(const std::array<double, 3>& p, double w) const {
    cplx s = eq1(p[0], p[1], p[2], w);
    if (reference) s /= eq1(p[0] * coupling_ratio(p[2], shift, T), p[1], p[2] + shift, w);
    return s;
  }
  Eigen::VectorXd residual(const std::array<double, 3>& p) const {
    const std::size_t n = f.size();
    Eigen::VectorXd r(amplitude_only ? n : 2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx m = model(p, f[k]);
      if (amplitude_only) {
        r(k) = std::abs(m) - std::abs(data[k]);
      } else {
        r(2 * k) = m.real() - data[k].real();
        r(2 * k + 1) = m.imag() - data[k].imag();
      }
    }
    return r;
  }
};

struct Guess {
  bool found = false;
  double G = 0.0, Gamma = 0.0, Omega = 0.0, fwhm = 0.0;
};

Guess initial_guess(const std::vector<double>& f, const std::vector<cplx>& s, const std::vector<bool>& ok) {
  Guess g;
  std::size_t k0 = f.size();
  for (std::size_t k = 0; k < f.size(); ++k)
    if (ok[k] && (k0 == f.size() || std::abs(s[k]) < std::abs(s[k0]))) k0 = k;
  if (k0 == f.size()) return g;
  const double p0 = std::norm(1.0 - s[k0]);
  if (!(p0 > 1e-12)) return g;
  auto edge = [&](int dir) {
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(k0);
    while (k + dir >= 0 && k + dir < static_cast<std::ptrdiff_t>(f.size())) {
      k += dir;
      if (ok[k] && std::norm(1.0 - s[k]) < 0.5 * p0) break;
    }
    return f[k];
  };
  g.fwhm = std::max(edge(1) - edge(-1), 2.0 * (f.size() > 1 ? std::abs(f[1] - f[0]) : 1.0));
  const double amin = std::abs(s[k0]);
  const double sum = 0.5 * g.fwhm;
  g.Omega = f[k0];
  g.Gamma = std::clamp(amin, 0.02, 0.98) * sum;
  g.G = sum - g.Gamma;
  g.found = true;
  return g;
}

FitResult run_fit(const std::vector<double>& fa, const std::vector<cplx>& sa, const std::vector<bool>& oka,
                  const FitOptions& opt, bool reference, double shift, double T) {
  FitResult out;
  const Guess guess = initial_guess(fa, sa, oka);
  if (!guess.found && !opt.initial) {
    out.warnings.push_back("no resonance found");
    return out;
  }
  std::array<double, 3> p = opt.initial ? *opt.initial : std::array<double, 3>{guess.G, guess.Gamma, guess.Omega};
  const double fwhm = guess.found ? guess.fwhm : 2.0 * (p[0] + p[1]);
  const double scale = std::max(0.5 * fwhm, 1e-300);

  Problem pr;
  pr.amplitude_only = opt.amplitude_only;
  pr.reference = reference;
  pr.shift = shift;
  pr.T = T;
  const double mirror = p[2] + shift;
  double lo, hi;
  if (opt.window) {
    lo = opt.window->first;
    hi = opt.window->second;
    if (reference && mirror > lo && mirror < hi) out.warnings.push_back("window contains the mirror peak");
  } else {
    lo = p[2] - 15.0 * scale;
    hi = p[2] + 15.0 * scale;
  }
  for (std::size_t k = 0; k < fa.size(); ++k) {
    if (!oka[k] || fa[k] < lo || fa[k] > hi) continue;
    if (reference && !opt.window && std::abs(fa[k] - mirror) < 3.0 * fwhm) continue;
    pr.f.push_back(fa[k]);
    pr.data.push_back(sa[k]);
  }
  out.points = static_cast<int>(pr.f.size());
  require(pr.f.size() >= 20, "fit_resonance: fewer than 20 points in the fit window");

  // scaled coordinates: G/s, Gamma/s, (Omega - Omega0)/s
  const double O0 = p[2];
  auto phys = [&](const Eigen::Vector3d& x) { return std::array<double, 3>{x(0) * scale, x(1) * scale, O0 + x(2) * scale}; };
  Eigen::Vector3d x(p[0] / scale, p[1] / scale, (p[2] - O0) / scale);
  Eigen::VectorXd r = pr.residual(phys(x));
  double cost = r.squaredNorm();
  Eigen::MatrixXd Jm(r.size(), 3);
  auto jacobian = [&](const Eigen::Vector3d& xc) {
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d xp = xc, xm = xc;
      xp(j) += 1e-6;
      xm(j) -= 1e-6;
      Jm.col(j) = (pr.residual(phys(xp)) - pr.residual(phys(xm))) / 2e-6;
    }
  };
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    jacobian(x);
    const Eigen::Matrix3d A = Jm.transpose() * Jm;
    const Eigen::Vector3d step = A.ldlt().solve(-Jm.transpose() * r);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      const Eigen::Vector3d xn = x + t * step;
      if (xn(0) < 0.0 || xn(1) < 0.0) continue;
      const Eigen::VectorXd rn = pr.residual(phys(xn));
      const double cn = rn.squaredNorm();
      if (std::isfinite(cn) && cn <= cost) {
        const auto pn = phys(xn), po = phys(x);
        double rel = 0.0;
        for (int j = 0; j < 3; ++j) rel = std::max(rel, std::abs(pn[j] - po[j]) / std::max(std::abs(po[j]), 1e-300));
        x = xn;
        r = rn;
        cost = cn;
        accepted = true;
        if (rel < opt.rel_tol) converged = true;
        break;
      }
    }
    if (!accepted) {
      // no descent left: the current point is a numerical minimum
      converged = true;
      break;
    }
    if (converged) break;
  }
  jacobian(x);
  const auto pf = phys(x);
  out.G = pf[0];
  out.Gamma = pf[1];
  out.Omega = pf[2];
  out.eta = out.G + out.Gamma > 0.0 ? out.G / (out.G + out.Gamma) : 0.0;
  out.iterations = it;
  const double m = static_cast<double>(r.size());
  out.residual_rms = std::sqrt(cost / m);
  const Eigen::Matrix3d A = Jm.transpose() * Jm;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  if (!lu.isInvertible() || !(out.G > 0.0)) {
    converged = false;
    out.warnings.push_back("singular Jacobian at the optimum");
  } else {
    const double s2 = m > 3 ? cost / (m - 3.0) : 0.0;
    out.covariance = s2 * scale * scale * lu.inverse();
  }
  out.converged = converged;
  return out;
}

}  // namespace

void RawSweep::validate() const {
  require(!frequencies.empty() && !fields.empty(), "raw sweep: empty grid");
  for (std::size_t k = 1; k < frequencies.size(); ++k)
    require(frequencies[k] > frequencies[k - 1], "raw sweep: frequencies must be strictly ascending");
  for (std::size_t k = 1; k < fields.size(); ++k)
    require(fields[k] > fields[k - 1], "raw sweep: fields must be strictly ascending");
  require(s21.size() == fields.size(), "raw sweep: one S21 trace per field required");
  for (const auto& t : s21) {
    require(t.size() == frequencies.size(), "raw sweep: trace length mismatch");
    for (const cplx& z : t) require(std::isfinite(z.real()) && std::isfinite(z.imag()), "raw sweep: NaN in S21");
  }
  if (has_s11()) {
    require(s11.size() == fields.size(), "raw sweep: one S11 trace per field required");
    for (const auto& t : s11) require(t.size() == frequencies.size(), "raw sweep: S11 trace length mismatch");
  }
}

std::size_t RawSweep::field_index(double B) const {
  for (std::size_t k = 0; k < fields.size(); ++k)
    if (std::abs(fields[k] - B) <= 1e-9 * std::max(1.0, std::abs(B))) return k;
  std::ostringstream o;
  o << "raw sweep: field " << B << " T not present";
  fail(Errc::invalid_argument, o.str());
}

RawSweep read_raw_sweep(std::istream& in) {
  RawSweep s;
  std::string line;
  std::vector<std::string> header;
  int col[6] = {-1, -1, -1, -1, -1, -1};
  const char* names[6] = {"f_GHz", "B_T", "re_s21", "im_s21", "re_s11", "im_s11"};
  std::map<double, std::vector<std::array<double, 5>>> rows;  // B -> (f, s21, s11)
  int lineno = 0;
  bool s11 = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto pos = line.find("T_K=");
      if (pos != std::string::npos) s.temperature = std::stod(line.substr(pos + 4));
      continue;
    }
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      for (int c = 0; c < 6; ++c)
        for (std::size_t k = 0; k < header.size(); ++k)
          if (header[k] == names[c]) col[c] = static_cast<int>(k);
      for (int c = 0; c < 4; ++c)
        if (col[c] < 0) fail(Errc::io, std::string("raw sweep: missing column ") + names[c]);
      s11 = col[4] >= 0 && col[5] >= 0;
      continue;
    }
    if (cells.size() < header.size()) fail(Errc::io, "raw sweep line " + std::to_string(lineno) + ": too few cells");
    const double B = parse_double(cells[col[1]], lineno);
    std::array<double, 5> r{parse_double(cells[col[0]], lineno) * 1e9, parse_double(cells[col[2]], lineno),
                            parse_double(cells[col[3]], lineno), 0.0, 0.0};
    if (s11) {
      r[3] = parse_double(cells[col[4]], lineno);
      r[4] = parse_double(cells[col[5]], lineno);
    }
    rows[B].push_back(r);
  }
  require(!rows.empty(), "raw sweep: no data rows", Errc::io);
  for (auto& [B, v] : rows) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
    if (s.fields.empty())
      for (const auto& r : v) s.frequencies.push_back(r[0]);
    require(v.size() == s.frequencies.size(), "raw sweep: frequency grid differs between fields", Errc::io);
    std::vector<cplx> t21, t11;
    for (std::size_t k = 0; k < v.size(); ++k) {
      require(v[k][0] == s.frequencies[k], "raw sweep: frequency grid differs between fields", Errc::io);
      t21.emplace_back(v[k][1], v[k][2]);
      t11.emplace_back(v[k][3], v[k][4]);
    }
    s.fields.push_back(B);
    s.s21.push_back(std::move(t21));
    if (s11) s.s11.push_back(std::move(t11));
  }
  s.validate();
  return s;
}

RawSweep read_raw_sweep(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path, Errc::io);
  return read_raw_sweep(in);
}

void write_raw_sweep(std::ostream& out, const RawSweep& s) {
  s.validate();
  char buf[256];
  std::snprintf(buf, sizeof buf, "# T_K=%.17g\n", s.temperature);
  out << buf;
  out << (s.has_s11() ? "f_GHz,B_T,re_s21,im_s21,re_s11,im_s11\n" : "f_GHz,B_T,re_s21,im_s21\n");
  for (std::size_t b = 0; b < s.fields.size(); ++b)
    for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
      const cplx z = s.s21[b][k];
      int n = std::snprintf(buf, sizeof buf, "%.15g,%.12g,%.17g,%.17g", s.frequencies[k] / 1e9, s.fields[b], z.real(),
                            z.imag());
      if (s.has_s11())
        std::snprintf(buf + n, sizeof buf - n, ",%.17g,%.17g", s.s11[b][k].real(), s.s11[b][k].imag());
      out << buf << '\n';
    }
}

NormalizedSpectrum normalize_transmission(const RawSweep& s, double B, double dB, double g) {
  require(dB != 0.0, "normalize: dB must be non-zero");
  const std::size_t i = s.field_index(B), j = s.field_index(B + dB);
  NormalizedSpectrum n;
  n.frequencies = s.frequencies;
  n.B = B;
  n.dB = dB;
  n.T = s.temperature;
  n.g = g;
  n.mirror_center = zeeman_frequency(B + dB, g);
  for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
    const cplx den = s.s21[j][k];
    if (std::abs(den) < 1e-12) {
      n.s21.emplace_back(NAN, NAN);
      n.valid.push_back(false);
    } else {
      n.s21.push_back(s.s21[i][k] / den);
      n.valid.push_back(true);
    }
  }
  // the reference must sit well outside the line: |dB| >> hbar Gamma / g mu_B
  const CouplingModel m;
  const double shift = std::abs(zeeman_frequency(B + dB, g) - zeeman_frequency(B, g));
  if (shift < 10.0 * (m.gamma_phi + m.gamma_inh)) n.warnings.push_back("field offset comparable to the linewidth");
  return n;
}

AmplitudeSpectrum normalize_reflection(const RawSweep& s, double B, double dB, double g) {
  require(s.has_s11(), "normalize_reflection: sweep has no S11 data");
  require(dB != 0.0, "normalize: dB must be non-zero");
  const std::size_t i = s.field_index(B), j = s.field_index(B + dB);
  AmplitudeSpectrum a;
  a.frequencies = s.frequencies;
  a.mirror_center = zeeman_frequency(B + dB, g);
  for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
    const double den = std::abs(s.s21[j][k]);
    if (den < 1e-12) {
      a.amplitude.push_back(NAN);
      a.valid.push_back(false);
    } else {
      a.amplitude.push_back(std::abs(s.s11[i][k] - s.s11[j][k]) / den);
      a.valid.push_back(true);
    }
  }
  return a;
}

std::array<double, 3> FitResult::errors() const {
  return {std::sqrt(covariance(0, 0)), std::sqrt(covariance(1, 1)), std::sqrt(covariance(2, 2))};
}

FitResult fit_resonance(const NormalizedSpectrum& s, const FitOptions& opt) {
  const double shift = zeeman_frequency(s.B + s.dB, s.g) - zeeman_frequency(s.B, s.g);
  return run_fit(s.frequencies, s.s21, s.valid, opt, opt.reference_model, shift, s.T);
}

FitResult fit_resonance(const std::vector<double>& f, const std::vector<cplx>& s21, const FitOptions& opt) {
  require(f.size() == s21.size() && !f.empty(), "fit_resonance: size mismatch");
  return run_fit(f, s21, std::vector<bool>(f.size(), true), opt, false, 0.0, 0.0);
}

LineMetrics extract_line_metrics(const std::vector<double>& f, const std::vector<cplx>& s21) {
  require(f.size() == s21.size() && f.size() >= 3, "extract_line_metrics: need at least 3 points");
  std::size_t k0 = 0;
  for (std::size_t k = 1; k < f.size(); ++k)
    if (std::abs(s21[k]) < std::abs(s21[k0])) k0 = k;  // strict: ties keep the lower frequency
  require(k0 > 0 && k0 + 1 < f.size(), "extract_line_metrics: minimum on the grid boundary", Errc::domain);

  // parabola through the three points around the minimum
  const double x0 = f[k0 - 1], x1 = f[k0], x2 = f[k0 + 1];
  const double y0 = std::abs(s21[k0 - 1]), y1 = std::abs(s21[k0]), y2 = std::abs(s21[k0 + 1]);
  const double d0 = (y1 - y0) / (x1 - x0), d1 = (y2 - y1) / (x2 - x1);
  const double a = (d1 - d0) / (x2 - x0);
  LineMetrics m;
  if (a > 0.0) {
    const double b = d0 - a * (x0 + x1);
    m.center = std::clamp(-b / (2.0 * a), x0, x2);
    const double c = y1 - a * x1 * x1 - b * x1;
    m.visibility = 1.0 - (a * m.center * m.center + b * m.center + c);
  } else {
    m.center = x1;
    m.visibility = 1.0 - y1;
  }

  // half maximum of |1 - S21|^2; 1/p is quadratic in detuning for a Lorentzian
  std::vector<double> p(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) p[k] = std::norm(1.0 - s21[k]);
  // refine the peak height from the quadratic through 1/p around the minimum
  double peak = p[k0];
  {
    const double u0 = f[k0 - 1] - x1, u2 = f[k0 + 1] - x1;
    const double v0 = 1.0 / p[k0 - 1], v1 = 1.0 / p[k0], v2 = 1.0 / p[k0 + 1];
    const double e0 = (v1 - v0) / -u0, e1 = (v2 - v1) / u2;
    const double qa = (e1 - e0) / (u2 - u0), qb = e0 - qa * u0;
    const double um = -qb / (2.0 * qa);
    if (qa > 0.0 && um > u0 && um < u2) peak = std::max(peak, 1.0 / (v1 + qb * um + qa * um * um));
  }
  const double half = 0.5 * peak;
  auto crossing = [&](int dir) {
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(k0);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(f.size());
    while (k + dir >= 0 && k + dir < n && p[k + dir] >= half) k += dir;
    if (k + dir < 0 || k + dir >= n) fail(Errc::domain, "extract_line_metrics: half maximum outside the grid");
    const std::ptrdiff_t k1 = k, k2 = k + dir;
    std::ptrdiff_t k3 = k2 + dir;
    if (k3 < 0 || k3 >= n) k3 = k1 - dir;
    // local coordinates avoid cancellation against the absolute frequency
    const double x0 = f[k1];
    const double xs[3] = {0.0, f[k2] - x0, f[k3] - x0}, ys[3] = {1.0 / p[k1], 1.0 / p[k2], 1.0 / p[k3]};
    const double target = 1.0 / half;
    // quadratic through the three points, root between xs[0] and xs[1]
    const double e0 = (ys[1] - ys[0]) / (xs[1] - xs[0]), e1 = (ys[2] - ys[1]) / (xs[2] - xs[1]);
    const double qa = (e1 - e0) / (xs[2] - xs[0]);
    const double qb = e0 - qa * (xs[0] + xs[1]);
    const double qc = ys[0] - qa * xs[0] * xs[0] - qb * xs[0] - target;
    const double lin = xs[0] + (target - ys[0]) / (ys[1] - ys[0]) * (xs[1] - xs[0]);
    if (qa == 0.0) return x0 + lin;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return x0 + lin;
    const double r1 = (-qb + std::sqrt(disc)) / (2.0 * qa), r2 = (-qb - std::sqrt(disc)) / (2.0 * qa);
    const double lo = std::min(xs[0], xs[1]), hi = std::max(xs[0], xs[1]);
    if (r1 >= lo && r1 <= hi) return x0 + r1;
    if (r2 >= lo && r2 <= hi) return x0 + r2;
    return x0 + lin;
  };
  m.fwhm = crossing(1) - crossing(-1);
  return m;
}

CouplingFit fit_coupling_law(const std::vector<CouplingPoint>& pts, double g, Weighting wt) {
  require(!pts.empty(), "fit_coupling_law: no points");
  bool nonzero = false;
  double sxx = 0.0, sxy = 0.0;
  std::vector<double> xs, ws;
  for (const auto& q : pts) {
    require(q.B > 0.0 && q.T > 0.0, "fit_coupling_law: need B > 0 and T > 0");
    const double f = zeeman_frequency(q.B, g);
    const double x = f * spin_polarization(f, q.T);
    const double w = wt == Weighting::relative ? 1.0 / (x * x) : 1.0;
    nonzero = nonzero || q.G != 0.0;
    sxx += w * x * x;
    sxy += w * x * q.G;
    xs.push_back(x);
    ws.push_back(w);
  }
  require(nonzero, "fit_coupling_law: all couplings are zero");
  CouplingFit r;
  r.points = static_cast<int>(pts.size());
  r.alpha_N = sxy / sxx;
  double rss = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) rss += ws[k] * std::pow(pts[k].G - r.alpha_N * xs[k], 2);
  r.residual = std::sqrt(rss / r.points);
  if (r.points < 2) {
    r.uncertainty = r.ci95 = NAN;
  } else {
    r.uncertainty = std::sqrt(rss / (r.points - 1) / sxx);
    const boost::math::students_t t(r.points - 1);
    r.ci95 = boost::math::quantile(boost::math::complement(t, 0.025)) * r.uncertainty;
  }
  return r;
}

RawSweep synthesize_sweep(const SynthConfig& c) {
  require(!c.frequencies.empty() && !c.fields.empty(), "synthesize: empty grid");
  require(c.noise >= 0.0, "synthesize: noise must be >= 0");
  require(c.line == "paramagnetic" || c.line == "powder", "synthesize: line must be paramagnetic or powder");
  c.model.validate();
  RawSweep s;
  s.frequencies = c.frequencies;
  s.fields = c.fields;
  s.temperature = c.T;
  std::vector<cplx> F(c.frequencies.size(), 1.0);
  cplx R = 0.0;
  if (!c.unit_background) {
    const Background& b = c.background;
    R = b.reflection;
    for (std::size_t k = 0; k < F.size(); ++k) {
      const double f = c.frequencies[k];
      double amp = 1.0;
      for (int r = 0; r < 3; ++r)
        amp += b.ripple_amp[r] * std::sin(2.0 * std::numbers::pi * f / b.ripple_period[r] + b.ripple_phase[r]);
      F[k] = b.amplitude * amp * std::exp(-I * (2.0 * std::numbers::pi * f * b.delay));
    }
  }
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double B : c.fields) {
    Spectrum m;
    const double fz = zeeman_frequency(B, c.chain.g);
    if (fz == 0.0) {
      m.s21.assign(c.frequencies.size(), 1.0);
      m.s11.assign(c.frequencies.size(), 0.0);
    } else if (c.line == "paramagnetic") {
      m = paramagnetic_s_params(c.frequencies, fz, collective_coupling(c.model, fz, c.T), gamma_total(c.model, fz, c.T));
    } else {
      MFParams p = c.chain;
      p.B = B;
      p.T = c.T;
      PowderOptions o;
      o.nodes = c.nodes;
      m = powder_spinwave_s21(c.frequencies, p, c.model, o);
    }
    std::vector<cplx> t21, t11;
    for (std::size_t k = 0; k < F.size(); ++k) {
      cplx z = F[k] * m.s21[k];
      if (c.noise > 0.0) z += cplx(c.noise * noise(rng), c.noise * noise(rng));
      t21.push_back(z);
      if (c.include_s11) {
        cplx r = R + F[k] * m.s11[k];
        if (c.noise > 0.0) r += cplx(c.noise * noise(rng), c.noise * noise(rng));
        t11.push_back(r);
      }
    }
    s.s21.push_back(std::move(t21));
    if (c.include_s11) s.s11.push_back(std::move(t11));
  }
  return s;
}

}  // namespace spinline
