#include "spinline/llg.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "spinline/constants.hpp"
#include "spinline/error.hpp"
#include "spinline/quadrature.hpp"

namespace spinline {

namespace {

using L = long double;
using V3 = Eigen::Matrix<L, 3, 1>;

V3 sph(L t, L f) {
  using std::cos;
  using std::sin;
  return V3(sin(t) * cos(f), sin(t) * sin(f), cos(t));
}

// Working frame: columns are the laboratory components of the working axes.
struct Frame {
  Eigen::Matrix<L, 3, 3> R = Eigen::Matrix<L, 3, 3>::Identity();
  bool rotated = false;
};

Frame choose_frame(const MFState& eq, bool force) {
  Frame fr;
  const bool pole = std::abs(std::sin(eq.theta1)) < 1e-3 || std::abs(std::sin(eq.theta2)) < 1e-3;
  if (!pole && !force) return fr;
  const V3 u1 = sph(eq.theta1, eq.phi1), u2 = sph(eq.theta2, eq.phi2);
  V3 n = u1.cross(u2);
  if (n.norm() < 1e-6L) {
    const V3 a = std::abs(u1.x()) < 0.9L ? V3::UnitX() : V3::UnitY();
    n = u1.cross(a);
  }
  n.normalize();
  const V3 e1 = u1 - u1.dot(n) * n;
  const V3 e1n = e1.normalized();
  const V3 e2 = n.cross(e1n);
  fr.R.col(0) = e1n;
  fr.R.col(1) = e2;
  fr.R.col(2) = n;
  fr.rotated = true;
  return fr;
}

struct Working {
  Frame fr;
  L x[4];  // theta1, phi1, theta2, phi2 in the working frame
};

Working working_coordinates(const MFState& eq, bool force) {
  Working w;
  w.fr = choose_frame(eq, force);
  const V3 u1 = w.fr.R.transpose() * sph(eq.theta1, eq.phi1);
  const V3 u2 = w.fr.R.transpose() * sph(eq.theta2, eq.phi2);
  auto angles = [](const V3& u, L& t, L& f) {
    t = std::atan2(std::hypot(u.x(), u.y()), u.z());
    f = std::atan2(u.y(), u.x());
  };
  angles(u1, w.x[0], w.x[1]);
  angles(u2, w.x[2], w.x[3]);
  return w;
}

// Free-energy bound as a function of working-frame angles.
L energy(const MFParams& p, const MFState& eq, const Frame& fr, const L* x) {
  L t[2], f[2];
  for (int a = 0; a < 2; ++a) {
    const V3 u = fr.R * sph(x[2 * a], x[2 * a + 1]);
    t[a] = std::atan2(std::hypot(u.x(), u.y()), u.z());
    f[a] = std::atan2(u.y(), u.x());
  }
  return free_energy_bound_t<L>(p, eq.M1, eq.M2, t[0], f[0], t[1], f[1]);
}

Eigen::Matrix4d hessian_at(const MFParams& params, const MFState& eq, const Working& w, double step) {
  // the entropy term does not depend on the angles; dropping it keeps the
  // differences from cancelling against a large constant when M is small
  MFParams p = params;
  p.T = 0.0;
  const L h = step;
  Eigen::Matrix4d H;
  const L f0 = energy(p, eq, w.fr, w.x);
  for (int a = 0; a < 4; ++a) {
    L xp[4], xm[4];
    std::copy(w.x, w.x + 4, xp);
    std::copy(w.x, w.x + 4, xm);
    xp[a] += h;
    xm[a] -= h;
    H(a, a) = static_cast<double>((energy(p, eq, w.fr, xp) - 2 * f0 + energy(p, eq, w.fr, xm)) / (h * h));
    for (int b = a + 1; b < 4; ++b) {
      L pp[4], pm[4], mp[4], mm[4];
      std::copy(w.x, w.x + 4, pp);
      std::copy(w.x, w.x + 4, pm);
      std::copy(w.x, w.x + 4, mp);
      std::copy(w.x, w.x + 4, mm);
      pp[a] += h, pp[b] += h;
      pm[a] += h, pm[b] -= h;
      mp[a] -= h, mp[b] += h;
      mm[a] -= h, mm[b] -= h;
      const L v = (energy(p, eq, w.fr, pp) - energy(p, eq, w.fr, pm) - energy(p, eq, w.fr, mp) +
                   energy(p, eq, w.fr, mm)) /
                  (4 * h * h);
      H(a, b) = H(b, a) = static_cast<double>(v);
    }
  }
  return H;
}

}  // namespace

Eigen::Matrix4d angular_hessian(const MFParams& p, const MFState& eq, double step, bool force_rotation) {
  return hessian_at(p, eq, working_coordinates(eq, force_rotation), step);
}

LinearizedDynamics linearize(const MFState& eq, const MFParams& p, double gamma, double step,
                             bool force_rotation) {
  p.validate();
  require(gamma >= 0.0, "linearize: Gilbert damping must be >= 0");
  require(eq.M1 > 1e-12 && eq.M2 > 1e-12, "linearize: equilibrium has no sublattice magnetization",
          Errc::domain);
  const Working w = working_coordinates(eq, force_rotation);
  const double s1 = std::sin(static_cast<double>(w.x[0])), s2 = std::sin(static_cast<double>(w.x[2]));
  if (std::abs(s1) < 1e-3 || std::abs(s2) < 1e-3)
    fail(Errc::internal, "linearize: frame rotation did not move the equilibrium off the pole");

  LinearizedDynamics d;
  d.hessian = hessian_at(p, eq, w, step);
  d.equilibrium = eq;
  d.gilbert_gamma = gamma;
  d.J = p.J;
  d.field_kelvin = p.field_kelvin();
  d.rotated = w.fr.rotated;
  const double M[2] = {eq.M1, eq.M2};
  const double S[2] = {s1, s2};
  const Eigen::Matrix4d& H = d.hessian;
  for (int a = 0; a < 2; ++a) {
    const int th = 2 * a, ph = 2 * a + 1;
    d.matrix.row(th) = -H.row(ph) / (M[a] * S[a]) - gamma * H.row(th);
    d.matrix.row(ph) = H.row(th) / (M[a] * S[a]) - gamma * H.row(ph) / (S[a] * S[a]);
  }
  return d;
}

ResonanceModes resonance_modes(const LinearizedDynamics& dyn) {
  Eigen::EigenSolver<Eigen::Matrix4d> es(dyn.matrix);
  require(es.info() == Eigen::Success, "resonance_modes: eigensolver failed", Errc::no_convergence);
  ResonanceModes r;
  // exp(-i Omega t) convention: decaying modes have Im(Omega) < 0
  for (int k = 0; k < 4; ++k) r.omegas.push_back(cplx(0.0, 1.0) * es.eigenvalues()(k));
  std::sort(r.omegas.begin(), r.omegas.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  const Eigen::JacobiSVD<Eigen::Matrix4cd> svd(es.eigenvectors());
  const auto sv = svd.singularValues();
  r.condition = sv(3) > 0.0 ? sv(0) / sv(3) : INFINITY;
  r.defective = !(r.condition <= 1e8);

  const double thr = 1e-6 * std::max(dyn.J, dyn.field_kelvin);
  for (const cplx& w : r.omegas) {
    if (w.real() < thr) continue;
    if (!r.has_selected) {
      r.selected = w;
      r.has_selected = true;
      continue;
    }
    const double tie = 1e-9 * std::max(w.real(), r.selected.real());
    if (w.real() > r.selected.real() + tie ||
        (std::abs(w.real() - r.selected.real()) <= tie && std::abs(w.imag()) < std::abs(r.selected.imag())))
      r.selected = w;
  }
  r.psi = 0.0;
  return r;
}

ResonanceModes resonance_at(const MFParams& p, double gamma) {
  const MFState eq = solve_equilibrium(p);
  ResonanceModes r = resonance_modes(linearize(eq, p, gamma));
  r.psi = p.psi;
  return r;
}

double analytic_resonance(const MFParams& p) {
  const double B = p.field_kelvin();
  const double r = B * B - 2.0 * p.J * p.J * p.epsilon * (std::sin(p.psi) - std::cos(p.psi));
  require(r >= 0.0, "analytic_resonance: negative radicand, the orientation is in the spin-flop regime",
          Errc::domain);
  return std::sqrt(r);
}

double canted_resonance_exact(const MFParams& p) {
  const auto Jc = p.couplings();
  const double B = p.field_kelvin();
  const double r = (Jc[0] + Jc[2]) / (Jc[1] + Jc[2]) * B * B + (Jc[0] + Jc[2]) * (Jc[2] - Jc[1]);
  require(r >= 0.0, "canted_resonance_exact: canted state unstable in plane", Errc::domain);
  return std::sqrt(r);
}

double gilbert_from_linewidth(double gamma_hz, double B, double g) {
  const double Bk = zeeman_kelvin(B, g);
  require(Bk > 0.0, "gilbert_from_linewidth: field must be > 0", Errc::domain);
  return hz_to_kelvin(gamma_hz) / Bk;
}

std::vector<ModeNode> powder_mode_distribution(const MFParams& p, double gamma, int nodes, int jobs) {
  require(nodes >= 1, "powder_mode_distribution: need at least one node");
  p.validate();
  const Quadrature q = gauss_legendre(nodes, 0.0, 1.0);
  std::vector<ModeNode> out(q.nodes.size());
  // ascending psi: cos(psi) runs downward
  detail::parallel_for(out.size(), jobs, [&](std::size_t k) {
    const std::size_t j = q.nodes.size() - 1 - k;
    ModeNode& n = out[k];
    n.psi = std::acos(q.nodes[j]);
    n.weight = q.weights[j];
    MFParams pk = p;
    pk.psi = n.psi;
    try {
      const MFState eq = solve_equilibrium(pk);
      n.phase = eq.phase;
      const double Bk = pk.field_kelvin();
      if (eq.phase == Phase::paramagnetic) {
        // no sublattice order: free-spin precession at the Zeeman frequency
        n.omega = cplx(Bk, -gamma * Bk * eq.M1);
        n.flags = "paramagnetic";
        return;
      }
      const LinearizedDynamics d = linearize(eq, pk, gamma);
      const ResonanceModes r = resonance_modes(d);
      if (!r.has_selected) {
        n.ok = false;
        n.flags = "no_mode";
        return;
      }
      n.omega = r.selected;
      if (r.defective) n.flags = "defective";
      if (d.rotated) n.flags += n.flags.empty() ? "rotated" : ";rotated";
    } catch (const std::exception& e) {
      n.ok = false;
      n.flags = std::string("error:") + e.what();
    }
  });
  return out;
}

}  // namespace spinline
