#include "spinline/chain_ed.hpp"

#include <cmath>
#include <complex>
#include <numeric>

#include "spinline/constants.hpp"
#include "spinline/error.hpp"
#include "spinline/quadrature.hpp"

namespace spinline {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

int bit(int s, int i) { return (s >> i) & 1; }
double zval(int s, int i) { return 1.0 - 2.0 * bit(s, i); }

std::vector<std::pair<int, int>> bonds(const ChainSpec& spec) {
  std::vector<std::pair<int, int>> b;
  for (int i = 0; i + 1 < spec.n_spins; ++i) b.emplace_back(i, i + 1);
  if (spec.boundary == Boundary::periodic && spec.n_spins >= 3) b.emplace_back(spec.n_spins - 1, 0);
  return b;
}

Vec3 normalized(const Vec3& a) {
  const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  require(n > 0.0 && std::isfinite(n), "axis must be a non-zero finite vector");
  return {a[0] / n, a[1] / n, a[2] / n};
}

int n_spins_of(const SpectrumED& s) {
  int n = 0;
  while ((1 << n) < s.dim()) ++n;
  return n;
}

// (sum_i a . sigma_i) applied to every column of V
Eigen::MatrixXcd apply_probe(const Eigen::MatrixXcd& V, const Vec3& a, int n) {
  const int D = static_cast<int>(V.rows());
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(D, V.cols());
  for (int s = 0; s < D; ++s) {
    for (int i = 0; i < n; ++i) {
      const double z = zval(s, i);
      if (a[2] != 0.0) R.row(s) += (a[2] * z) * V.row(s);
      const cd off = a[0] + I * (a[1] * z);
      if (off != cd{}) R.row(s ^ (1 << i)) += off * V.row(s);
    }
  }
  return R;
}

Eigen::VectorXd boltzmann(const Eigen::VectorXd& e, double T) {
  require(T > 0.0 && std::isfinite(T), "temperature must be > 0", Errc::domain);
  return (-(e.array() - e(0)) / T).exp().matrix();
}

// w_m K(beta (e_m - e_n)) with K(X) = expm1(X)/X, evaluated without overflow
double kubo_weight(double wm, double wn, double X) {
  if (std::abs(X) < 1e-4) return wm * (1.0 + X / 2.0 + X * X / 6.0 + X * X * X / 24.0);
  if (X <= 0.0) return wm * std::expm1(X) / X;
  return wn * (-std::expm1(-X)) / X;
}

struct ProbeElements {
  Eigen::MatrixXd q2;     // |Q_mn|^2
  Eigen::VectorXd qdiag;  // Q_mm
};

ProbeElements probe_elements(const SpectrumED& s, const Vec3& axis) {
  require(s.has_vectors(), "spectrum has no eigenvectors");
  const int n = n_spins_of(s);
  const Eigen::MatrixXcd QV = apply_probe(s.eigenvectors, normalized(axis), n);
  const Eigen::MatrixXcd Qe = s.eigenvectors.adjoint() * QV;
  return {Qe.cwiseAbs2(), Qe.diagonal().real()};
}

Eigen::VectorXd xx_diag(const SpectrumED& s, int site) {
  const int n = n_spins_of(s);
  const int D = s.dim();
  const int j = (site + 1) % n;
  const int mask = (1 << site) | (1 << j);
  Eigen::MatrixXcd R(D, D);
  for (int st = 0; st < D; ++st) R.row(st ^ mask) = s.eigenvectors.row(st);
  return s.eigenvectors.conjugate().cwiseProduct(R).colwise().sum().real().transpose();
}

double chi_from(const Eigen::VectorXd& e, const ProbeElements& p, double T, int n) {
  const Eigen::VectorXd w = boltzmann(e, T);
  const double Z = w.sum();
  const double beta = 1.0 / T;
  const int D = static_cast<int>(e.size());
  double z2 = 0.0;
  for (int m = 0; m < D; ++m) {
    for (int k = 0; k < D; ++k) {
      const double q = p.q2(m, k);
      if (q == 0.0) continue;
      z2 += q * kubo_weight(w(m), w(k), beta * (e(m) - e(k)));
    }
  }
  const double z1 = w.dot(p.qdiag) / Z;
  return beta * (z2 / Z - z1 * z1) / n;
}

}  // namespace

void ChainSpec::validate() const {
  require(n_spins >= 1 && n_spins <= 10, "n_spins must be in 1..10");
  require(std::isfinite(J), "J must be finite");
  require(std::abs(epsilon) < 1.0, "|epsilon| must be < 1");
  require(psi >= 0.0 && psi <= std::numbers::pi + 1e-12, "psi must be in [0, pi]");
  require(g > 0.0, "g must be > 0");
  require(boundary == Boundary::open || n_spins >= 3, "periodic boundary needs n_spins >= 3");
}

Vec3 ChainSpec::couplings() const {
  return {J, J * (1.0 + epsilon * std::sin(psi)), J * (1.0 + epsilon * std::cos(psi))};
}

Eigen::MatrixXcd build_hamiltonian(const ChainSpec& spec, double B, const Vec3& field_axis) {
  require(spec.n_spins <= 10, "n_spins > 10 exceeds the dense solver limit");
  spec.validate();
  const Vec3 a = normalized(field_axis);
  const int n = spec.n_spins;
  const int D = 1 << n;
  const Vec3 Jc = spec.couplings();
  const double h = zeeman_kelvin(B, spec.g);
  const auto bl = bonds(spec);

  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(D, D);
  for (int s = 0; s < D; ++s) {
    for (auto [i, j] : bl) {
      const double zi = zval(s, i), zj = zval(s, j);
      const int t = s ^ (1 << i) ^ (1 << j);
      H(s, s) += Jc[2] * zi * zj;
      H(t, s) += Jc[0] - Jc[1] * zi * zj;
    }
    if (h != 0.0) {
      for (int i = 0; i < n; ++i) {
        const double z = zval(s, i);
        H(s, s) += -h * a[2] * z;
        H(s ^ (1 << i), s) += -h * (a[0] + I * (a[1] * z));
      }
    }
  }
  return H;
}

SpectrumED diagonalize(const Eigen::MatrixXcd& H) {
  require(H.rows() == H.cols() && H.rows() > 0, "diagonalize: matrix must be square and non-empty");
  const double norm = H.norm();
  require((H - H.adjoint()).norm() <= 1e-12 * std::max(norm, 1e-300) || norm == 0.0,
          "diagonalize: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  require(es.info() == Eigen::Success, "diagonalize: eigensolver failed", Errc::no_convergence);
  SpectrumED s;
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();
  return s;
}

SpectrumED solve_chain(const ChainSpec& spec, double B, const Vec3& field_axis) {
  SpectrumED s = diagonalize(build_hamiltonian(spec, B, field_axis));
  s.field = B;
  s.field_axis = normalized(field_axis);
  s.spec = spec;
  return s;
}

double free_energy(const SpectrumED& s, double T) {
  const Eigen::VectorXd w = boltzmann(s.eigenvalues, T);
  return s.eigenvalues(0) - T * std::log(w.sum());
}

double specific_heat(const SpectrumED& s, double T) {
  const Eigen::VectorXd w = boltzmann(s.eigenvalues, T);
  const double Z = w.sum();
  const Eigen::ArrayXd d = (s.eigenvalues.array() - s.eigenvalues(0)) / T;
  const double mean = (w.array() * d).sum() / Z;
  const double var = (w.array() * (d - mean).square()).sum() / Z;
  return var / n_spins_of(s);
}

double susceptibility(const SpectrumED& s, double T, const Vec3& probe_axis) {
  return chi_from(s.eigenvalues, probe_elements(s, probe_axis), T, n_spins_of(s));
}

double magnetization(const SpectrumED& s, double T) {
  const ProbeElements p = probe_elements(s, s.field_axis);
  const Eigen::VectorXd w = boltzmann(s.eigenvalues, T);
  return w.dot(p.qdiag) / w.sum() / n_spins_of(s);
}

double correlator_xx(const SpectrumED& s, double T, int site) {
  require(s.has_vectors(), "spectrum has no eigenvectors");
  const int n = n_spins_of(s);
  require(site >= 0 && site < n - 1, "correlator_xx: site out of range");
  const Eigen::VectorXd w = boltzmann(s.eigenvalues, T);
  return w.dot(xx_diag(s, site)) / w.sum();
}

ThermoResult thermo_sweep(const SpectrumED& s, const std::vector<double>& T, const Vec3& probe_axis) {
  require(!T.empty(), "empty temperature grid");
  const int n = n_spins_of(s);
  const ProbeElements probe = probe_elements(s, probe_axis);
  const ProbeElements field = probe_elements(s, s.field_axis);
  Eigen::VectorXd corr = Eigen::VectorXd::Zero(s.dim());
  const int nb = n - 1;
  for (int i = 0; i < nb; ++i) corr += xx_diag(s, i);
  if (nb > 0) corr /= nb;

  ThermoResult r;
  for (double t : T) {
    const Eigen::VectorXd w = boltzmann(s.eigenvalues, t);
    const double Z = w.sum();
    const double chi = chi_from(s.eigenvalues, probe, t, n);
    r.temperatures.push_back(t);
    r.specific_heat.push_back(specific_heat(s, t));
    r.chi.push_back(chi);
    r.chi_T.push_back(chi * t);
    r.magnetization.push_back(w.dot(field.qdiag) / Z / n);
    r.correlator_xx.push_back(nb > 0 ? w.dot(corr) / Z : std::nan(""));
  }
  return r;
}

ThermoResult powder_average_thermo(const ChainSpec& tmpl, const std::vector<double>& T, double B,
                                   int nodes) {
  require(nodes >= 8, "powder_average_thermo: need at least 8 quadrature nodes");
  require(!T.empty(), "powder_average_thermo: empty temperature grid");
  const Quadrature q = gauss_legendre(nodes, 0.0, std::numbers::pi);
  ThermoResult acc;
  acc.temperatures = T;
  const std::size_t nt = T.size();
  for (auto* v : {&acc.specific_heat, &acc.chi, &acc.chi_T, &acc.magnetization, &acc.correlator_xx})
    v->assign(nt, 0.0);
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    ChainSpec spec = tmpl;
    spec.psi = q.nodes[k];
    const double w = q.weights[k] / std::numbers::pi;
    const ThermoResult r = thermo_sweep(solve_chain(spec, B), T, kAxisY);
    for (std::size_t i = 0; i < nt; ++i) {
      acc.specific_heat[i] += w * r.specific_heat[i];
      acc.chi[i] += w * r.chi[i];
      acc.chi_T[i] += w * r.chi_T[i];
      acc.magnetization[i] += w * r.magnetization[i];
      acc.correlator_xx[i] += w * r.correlator_xx[i];
    }
  }
  return acc;
}

std::vector<double> dilution_weights(double p, int n_max) {
  require(p > 0.0 && p < 1.0, "dilution probability must be in (0, 1)");
  require(n_max >= 1 && n_max <= 10, "n_max must be in 1..10");
  std::vector<double> w(n_max);
  for (int n = 1; n <= n_max; ++n) w[n - 1] = std::pow(p, n);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= sum;
  return w;
}

std::vector<double> chain_mixture_chiT(const std::vector<double>& weights, double J, double g,
                                       const std::vector<double>& T, double B) {
  require(!weights.empty() && weights.size() <= 10, "length weights must cover n = 1..<=10");
  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "length weights must be non-negative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "length weights must be normalized");
  std::vector<double> out(T.size(), 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    ChainSpec spec;
    spec.n_spins = static_cast<int>(k) + 1;
    spec.J = J;
    spec.g = g;
    const ThermoResult r = thermo_sweep(solve_chain(spec, B), T, kAxisY);
    for (std::size_t i = 0; i < T.size(); ++i) out[i] += weights[k] * r.chi_T[i];
  }
  return out;
}

std::vector<double> composite_chiT(const CompositeModel& m, const std::vector<double>& T) {
  require(m.radical_fraction > 0.0 && m.radical_fraction <= 1.0, "radical_fraction must be in (0, 1]");
  ChainSpec dimer;
  dimer.n_spins = 2;
  dimer.J = m.dimer_J;
  dimer.g = m.g;
  const ThermoResult d = thermo_sweep(solve_chain(dimer, m.B), T, kAxisY);
  const std::vector<double> c = chain_mixture_chiT(m.length_weights, m.chain_J, m.g, T, m.B);
  std::vector<double> out(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) out[i] = m.radical_fraction * 0.5 * (d.chi_T[i] + c[i]);
  return out;
}

double chiT_to_emu(double chiT, double g) { return chiT * curie_constant_half(g); }

}  // namespace spinline
