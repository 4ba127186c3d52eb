#include "spinline/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "lm_solve.hpp"
#include "parallel.hpp"
#include "spinline/constants.hpp"
#include "spinline/error.hpp"

namespace spinline {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

double teff(const MFParams& p) { return std::max(p.T, kTemperatureFloor); }

struct InPlane {
  double Jy, Jz, Bk, T;

  double K(double t1, double t2) const {
    return Jy * std::sin(t1) * std::sin(t2) + Jz * std::cos(t1) * std::cos(t2);
  }
  // residual of the in-plane stationarity system in (lambda1, lambda2, theta1, theta2);
  // the angular equations are divided by the sublattice magnetization
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const double M1 = std::tanh(x(0) / T), M2 = std::tanh(x(1) / T);
    const double s1 = std::sin(x(2)), c1 = std::cos(x(2)), s2 = std::sin(x(3)), c2 = std::cos(x(3));
    const double k = Jy * s1 * s2 + Jz * c1 * c2;
    Eigen::VectorXd g(4);
    g(0) = x(0) - (Bk * s1 - M2 * k);
    g(1) = x(1) - (Bk * s2 - M1 * k);
    g(2) = -Bk * c1 + M2 * (Jy * c1 * s2 - Jz * s1 * c2);
    g(3) = -Bk * c2 + M1 * (Jy * s1 * c2 - Jz * c1 * s2);
    return g;
  }
  // damped fixed point for the magnitudes at frozen angles
  std::pair<double, double> relax(double t1, double t2, double M1, double M2) const {
    const double k = K(t1, t2);
    const double s1 = std::sin(t1), s2 = std::sin(t2);
    for (int it = 0; it < 400; ++it) {
      const double n1 = std::tanh((Bk * s1 - M2 * k) / T);
      const double n2 = std::tanh((Bk * s2 - M1 * k) / T);
      const double d = std::abs(n1 - M1) + std::abs(n2 - M2);
      M1 = 0.5 * (M1 + n1);
      M2 = 0.5 * (M2 + n2);
      if (d < 1e-14) break;
    }
    return {M1, M2};
  }
};

InPlane in_plane(const MFParams& p) {
  const auto Jc = p.couplings();
  return {Jc[1], Jc[2], p.field_kelvin(), teff(p)};
}

// gauge lambda >= 0 by flipping the sublattice direction, then classify
MFState finish(const MFParams& p, double l1, double l2, double t1, double t2, double residual) {
  const double T = teff(p);
  if (l1 < 0.0) {
    l1 = -l1;
    t1 += kPi;
  }
  if (l2 < 0.0) {
    l2 = -l2;
    t2 += kPi;
  }
  MFState s;
  s.lambda1 = l1;
  s.lambda2 = l2;
  s.M1 = std::tanh(l1 / T);
  s.M2 = std::tanh(l2 / T);
  s.theta1 = wrap(t1);
  s.theta2 = wrap(t2);
  s.phi1 = s.phi2 = kHalfPi;
  s.residual = residual;
  if (s.M1 < 1e-12 && s.M2 < 1e-12) {
    s.M1 = s.M2 = 0.0;
    s.lambda1 = s.lambda2 = 0.0;
    s.theta1 = s.theta2 = kHalfPi;
  }
  s.free_energy = free_energy_bound(p, s.M1, s.M2, s.orientation());
  const double d = s.dtheta();
  if (s.M1 == 0.0 && s.M2 == 0.0)
    s.phase = Phase::paramagnetic;
  else if (d < kAngleTolerance)
    s.phase = Phase::paramagnetic;
  else if (std::abs(d - kPi) < kAngleTolerance)
    s.phase = Phase::antiferromagnetic;
  else
    s.phase = Phase::spin_flop;
  return s;
}

std::optional<MFState> try_seed(const MFParams& p, const InPlane& m, double t1, double t2) {
  auto [M1, M2] = m.relax(t1, t2, 1.0, 1.0);
  const double k = m.K(t1, t2);
  Eigen::VectorXd x(4);
  x << m.Bk * std::sin(t1) - M2 * k, m.Bk * std::sin(t2) - M1 * k, t1, t2;
  const auto r = detail::solve_root([&](const Eigen::VectorXd& v) { return m.residual(v); }, x, 1e-12);
  if (!(r.residual <= 1e-10)) return std::nullopt;
  return finish(p, r.x(0), r.x(1), r.x(2), r.x(3), r.residual);
}

}  // namespace

void MFParams::validate() const {
  require(std::isfinite(J) && J >= 0.0, "J must be >= 0 (antiferromagnetic or decoupled)");
  require(std::abs(epsilon) < 1.0, "|epsilon| must be < 1");
  require(std::isfinite(psi), "psi must be finite");
  require(g > 0.0, "g must be > 0");
  require(std::isfinite(B) && B >= 0.0, "B must be >= 0", Errc::domain);
  require(std::isfinite(T) && T >= 0.0, "T must be >= 0", Errc::domain);
}

std::array<double, 3> MFParams::couplings() const {
  return {J, J * (1.0 + epsilon * std::sin(psi)), J * (1.0 + epsilon * std::cos(psi))};
}

double MFParams::field_kelvin() const { return zeeman_kelvin(B, g); }

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::paramagnetic: return "paramagnetic";
    case Phase::spin_flop: return "spin_flop";
    case Phase::antiferromagnetic: return "antiferromagnetic";
  }
  return "?";
}

double MFState::dtheta() const {
  const double u1[3] = {std::sin(theta1) * std::cos(phi1), std::sin(theta1) * std::sin(phi1), std::cos(theta1)};
  const double u2[3] = {std::sin(theta2) * std::cos(phi2), std::sin(theta2) * std::sin(phi2), std::cos(theta2)};
  const double c = u1[0] * u2[0] + u1[1] * u2[1] + u1[2] * u2[2];
  const double sx = u1[1] * u2[2] - u1[2] * u2[1], sy = u1[2] * u2[0] - u1[0] * u2[2],
               sz = u1[0] * u2[1] - u1[1] * u2[0];
  return std::atan2(std::sqrt(sx * sx + sy * sy + sz * sz), c);
}

double free_energy_bound(const MFParams& p, double M1, double M2, const Orientation& o) {
  require(M1 >= 0.0 && M1 <= 1.0 && M2 >= 0.0 && M2 <= 1.0, "magnitudes must be in [0, 1]");
  return free_energy_bound_t<double>(p, M1, M2, o.theta1, o.phi1, o.theta2, o.phi2);
}

double consistency_residual(const MFParams& p, const MFState& s) {
  using L = long double;
  const auto Jc = p.couplings();
  const double Bk = p.field_kelvin();
  auto u = [](double t, double f) {
    return std::array<double, 3>{std::sin(t) * std::cos(f), std::sin(t) * std::sin(f), std::cos(t)};
  };
  const auto u1 = u(s.theta1, s.phi1), u2 = u(s.theta2, s.phi2);
  const double K = Jc[0] * u1[0] * u2[0] + Jc[1] * u1[1] * u2[1] + Jc[2] * u1[2] * u2[2];
  double r2 = 0.0;
  const double T = teff(p);
  // lambda residuals only carry information while tanh has not saturated
  const double e1 = std::tanh((Bk * u1[1] - s.M2 * K) / T) - s.M1;
  const double e2 = std::tanh((Bk * u2[1] - s.M1 * K) / T) - s.M2;
  r2 += e1 * e1 + e2 * e2;
  L x[4] = {s.theta1, s.phi1, s.theta2, s.phi2};
  const L h = 1e-6L;
  for (int k = 0; k < 4; ++k) {
    L xp[4], xm[4];
    std::copy(x, x + 4, xp);
    std::copy(x, x + 4, xm);
    xp[k] += h;
    xm[k] -= h;
    const L fp = free_energy_bound_t<L>(p, s.M1, s.M2, xp[0], xp[1], xp[2], xp[3]);
    const L fm = free_energy_bound_t<L>(p, s.M1, s.M2, xm[0], xm[1], xm[2], xm[3]);
    const double gk = static_cast<double>((fp - fm) / (2 * h));
    r2 += gk * gk;
  }
  return std::sqrt(r2);
}

MFState solve_equilibrium(const MFParams& p) {
  p.validate();
  const InPlane m = in_plane(p);

  // zero field above the ordering temperature: the disordered state is exact
  if (m.Bk == 0.0 && teff(p) >= std::max(m.Jy, m.Jz)) return finish(p, 0.0, 0.0, kHalfPi, kHalfPi, 0.0);

  std::vector<std::pair<double, double>> seeds;
  seeds.emplace_back(kHalfPi, kHalfPi);  // paramagnetic
  {
    auto [Ma, Mb] = m.relax(0.0, kPi, 1.0, 1.0);
    const double M = 0.5 * (Ma + Mb);
    if (M > 1e-8) {
      const double s = std::min(0.999999, m.Bk / (M * (m.Jy + m.Jz)));
      const double a = std::asin(s);
      seeds.emplace_back(a, kPi - a);  // symmetric canted
    }
  }
  seeds.emplace_back(kHalfPi, 1.5 * kPi);  // collinear along the field
  seeds.emplace_back(0.0, kPi);            // antiparallel along z

  std::optional<MFState> best;
  auto consider = [&](const std::optional<MFState>& c) {
    if (c && (!best || c->free_energy < best->free_energy - 1e-13)) best = c;
  };
  for (auto [a, b] : seeds) consider(try_seed(p, m, a, b));

  if (!best) {
    // direct minimization on an angular grid, then polish
    double fbest = INFINITY, ba = 0.0, bb = 0.0;
    const int n = 72;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double a = kTwoPi * i / n, b = kTwoPi * j / n;
        auto [M1, M2] = m.relax(a, b, 1.0, 1.0);
        if (M1 < 0.0 || M2 < 0.0) continue;
        const double f = free_energy_bound(p, M1, M2, {a, kHalfPi, b, kHalfPi});
        if (f < fbest) {
          fbest = f;
          ba = a;
          bb = b;
        }
      }
    consider(try_seed(p, m, ba, bb));
  }
  if (!best) fail(Errc::no_convergence, "solve_equilibrium: no branch converged");
  return *best;
}

MFState solve_equilibrium_3d(const MFParams& p, const MFState& seed) {
  p.validate();
  const auto Jc = p.couplings();
  const double Bk = p.field_kelvin();
  const double T = teff(p);
  if (seed.M1 == 0.0 && seed.M2 == 0.0) return seed;

  using V3 = Eigen::Vector3d;
  auto dir = [](double t, double f) {
    return V3(std::sin(t) * std::cos(f), std::sin(t) * std::sin(f), std::cos(t));
  };
  // tangent coordinates around the seed directions avoid the spherical poles
  auto basis = [](const V3& u) {
    V3 a = std::abs(u.x()) < 0.9 ? V3::UnitX() : V3::UnitY();
    V3 e1 = (a - a.dot(u) * u).normalized();
    return std::pair<V3, V3>{e1, u.cross(e1)};
  };
  const V3 u10 = dir(seed.theta1, seed.phi1), u20 = dir(seed.theta2, seed.phi2);
  const auto [a1, b1] = basis(u10);
  const auto [a2, b2] = basis(u20);
  const Eigen::DiagonalMatrix<double, 3> Jm(Jc[0], Jc[1], Jc[2]);

  auto dirs = [&](const Eigen::VectorXd& x) {
    return std::pair<V3, V3>{(u10 + x(2) * a1 + x(3) * b1).normalized(), (u20 + x(4) * a2 + x(5) * b2).normalized()};
  };
  auto G = [&](const Eigen::VectorXd& x) {
    const auto [u1, u2] = dirs(x);
    const double M1 = std::tanh(x(0) / T), M2 = std::tanh(x(1) / T);
    const V3 h1 = Bk * V3::UnitY() - M2 * (Jm * u2);  // molecular field on 1
    const V3 h2 = Bk * V3::UnitY() - M1 * (Jm * u1);
    Eigen::VectorXd g(6);
    g(0) = x(0) - h1.dot(u1);
    g(1) = x(1) - h2.dot(u2);
    // torque balance: molecular field parallel to the sublattice direction
    const V3 c1 = u1.cross(h1), c2 = u2.cross(h2);
    const auto [e1, f1] = basis(u1);
    const auto [e2, f2] = basis(u2);
    g(2) = c1.dot(e1);
    g(3) = c1.dot(f1);
    g(4) = c2.dot(e2);
    g(5) = c2.dot(f2);
    return g;
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x(0) = seed.lambda1;
  x(1) = seed.lambda2;
  const auto r = detail::solve_root(G, x, 1e-12);
  if (!(r.residual <= 1e-10)) fail(Errc::no_convergence, "solve_equilibrium_3d: refinement did not converge");
  const auto [u1, u2] = dirs(r.x);
  MFState s;
  s.lambda1 = r.x(0);
  s.lambda2 = r.x(1);
  s.M1 = std::tanh(s.lambda1 / T);
  s.M2 = std::tanh(s.lambda2 / T);
  s.theta1 = std::acos(std::clamp(u1.z(), -1.0, 1.0));
  s.phi1 = std::atan2(u1.y(), u1.x());
  s.theta2 = std::acos(std::clamp(u2.z(), -1.0, 1.0));
  s.phi2 = std::atan2(u2.y(), u2.x());
  s.residual = r.residual;
  s.free_energy = free_energy_bound(p, s.M1, s.M2, s.orientation());
  const double d = s.dtheta();
  s.phase = d < kAngleTolerance ? Phase::paramagnetic
            : std::abs(d - kPi) < kAngleTolerance ? Phase::antiferromagnetic
                                                  : Phase::spin_flop;
  return s;
}

double critical_field(const MFParams& p) {
  const auto Jc = p.couplings();
  return (Jc[1] + Jc[2]) / zeeman_kelvin(1.0, p.g);
}

double spin_flop_field(const MFParams& p) {
  const auto Jc = p.couplings();
  if (Jc[1] <= Jc[2]) return 0.0;
  return std::sqrt(Jc[1] * Jc[1] - Jc[2] * Jc[2]) / zeeman_kelvin(1.0, p.g);
}

double spin_flop_field_first_order(const MFParams& p) {
  const double r = 2.0 * p.epsilon * (std::sin(p.psi) - std::cos(p.psi));
  require(r >= 0.0, "spin_flop_field_first_order: no spin-flop threshold for this orientation", Errc::domain);
  return p.J * std::sqrt(r) / zeeman_kelvin(1.0, p.g);
}

double neel_temperature(const MFParams& p) {
  const auto Jc = p.couplings();
  return std::max(Jc[1], Jc[2]);
}

std::vector<PhaseCell> phase_diagram(const MFParams& tmpl, const std::vector<double>& T,
                                     const std::vector<double>& B, int jobs) {
  require(!T.empty() && !B.empty(), "phase_diagram: empty grid");
  require(std::is_sorted(T.begin(), T.end()) && std::is_sorted(B.begin(), B.end()),
          "phase_diagram: grids must be ascending");
  std::vector<PhaseCell> cells(T.size() * B.size());
  detail::parallel_for(cells.size(), jobs, [&](std::size_t k) {
    PhaseCell& c = cells[k];
    c.T = T[k / B.size()];
    c.B = B[k % B.size()];
    MFParams p = tmpl;
    p.T = c.T;
    p.B = c.B;
    try {
      c.state = solve_equilibrium(p);
    } catch (const std::exception& e) {
      c.ok = false;
      c.error = e.what();
    }
  });
  return cells;
}

}  // namespace spinline
