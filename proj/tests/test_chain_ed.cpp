#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

#include "doctest.h"
#include "spinline/chain_ed.hpp"
#include "spinline/constants.hpp"
#include "spinline/error.hpp"

using namespace spinline;
using Mat = Eigen::MatrixXcd;
using cd = std::complex<double>;

namespace {

// Independent construction from Kronecker products of Pauli matrices.
Mat kron(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

Mat pauli(int axis) {
  Mat s(2, 2);
  if (axis == 0) s << 0, 1, 1, 0;
  if (axis == 1) s << 0, cd(0, -1), cd(0, 1), 0;
  if (axis == 2) s << 1, 0, 0, -1;
  return s;
}

Mat site_op(int n, int site, int axis) {
  Mat r = Mat::Identity(1, 1);
  for (int k = 0; k < n; ++k) r = kron(r, k == site ? pauli(axis) : Mat::Identity(2, 2));
  return r;
}

Mat brute_hamiltonian(int n, double J, double eps, double psi, double h) {
  const double Jc[3] = {J, J * (1 + eps * std::sin(psi)), J * (1 + eps * std::cos(psi))};
  const int d = 1 << n;
  Mat H = Mat::Zero(d, d);
  for (int i = 0; i + 1 < n; ++i)
    for (int a = 0; a < 3; ++a) H += Jc[a] * site_op(n, i, a) * site_op(n, i + 1, a);
  for (int i = 0; i < n; ++i) H -= h * site_op(n, i, 1);
  return H;
}

Eigen::VectorXd brute_eigenvalues(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  return es.eigenvalues();
}

// Magnetization along y per spin from an explicit trace.
double brute_magnetization(const Mat& H, int n, double T) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  Mat My = Mat::Zero(H.rows(), H.cols());
  for (int i = 0; i < n; ++i) My += site_op(n, i, 1);
  const auto& E = es.eigenvalues();
  double Z = 0, m = 0;
  for (Eigen::Index k = 0; k < E.size(); ++k) {
    const double w = std::exp(-(E(k) - E(0)) / T);
    const auto v = es.eigenvectors().col(k);
    Z += w;
    m += w * (v.adjoint() * My * v)(0, 0).real();
  }
  return m / Z / n;
}

ChainSpec spec(int n, double J = 1.0, double eps = 0.0, double psi = 0.0) {
  ChainSpec s;
  s.n_spins = n;
  s.J = J;
  s.epsilon = eps;
  s.psi = psi;
  return s;
}

double richardson_d2(const std::function<double(double)>& F, double x, double h) {
  auto d2 = [&](double s) { return (F(x + s) - 2 * F(x) + F(x - s)) / (s * s); };
  return (4 * d2(h / 2) - d2(h)) / 3;
}

}  // namespace

TEST_CASE("single spin without field is the zero matrix") {
  const Mat H = build_hamiltonian(spec(1, 3.0), 0.0);
  CHECK(H.norm() == 0.0);
}

TEST_CASE("dimer spectrum is -3J, J, J, J") {
  const double J = 0.7;
  const auto s = solve_chain(spec(2, J), 0.0);
  REQUIRE(s.dim() == 4);
  CHECK(s.eigenvalues(0) == doctest::Approx(-3 * J).epsilon(1e-12));
  for (int k = 1; k < 4; ++k) CHECK(s.eigenvalues(k) == doctest::Approx(J).epsilon(1e-12));
}

TEST_CASE("Hamiltonian matches the Kronecker-product construction") {
  const double h = zeeman_kelvin(0.4, 2.004);
  for (int n : {2, 3, 4}) {
    const ChainSpec c = spec(n, 0.7, -0.086, 0.3);
    const Mat ours = build_hamiltonian(c, 0.4);
    const Mat ref = brute_hamiltonian(n, 0.7, -0.086, 0.3, h);
    // basis ordering may differ, the spectrum may not
    const auto a = diagonalize(ours).eigenvalues, b = brute_eigenvalues(ref);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
  // the 8x8 isotropic case, element by element up to the bit order
  const Mat H3 = build_hamiltonian(spec(3, 1.0), 0.0);
  const Mat R3 = brute_hamiltonian(3, 1.0, 0.0, 0.0, 0.0);
  CHECK((diagonalize(H3).eigenvalues - brute_eigenvalues(R3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((H3 - R3).norm() < 1e-12);
}

TEST_CASE("diagonalize basic cases and reconstruction") {
  const auto id = diagonalize(Mat::Identity(4, 4));
  for (int k = 0; k < 4; ++k) CHECK(id.eigenvalues(k) == doctest::Approx(1.0));
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  const auto sd = diagonalize(d);
  CHECK(sd.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(sd.eigenvalues(2) == doctest::Approx(3.0));
  CHECK(std::abs(sd.eigenvectors.col(0).norm() - 1.0) < 1e-14);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Mat A(64, 64);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) A(i, j) = cd(nd(rng), nd(rng));
  const Mat H = (A + A.adjoint()) / 2.0;
  const auto s = diagonalize(H);
  const Mat R = s.eigenvectors * s.eigenvalues.cast<cd>().asDiagonal() * s.eigenvectors.adjoint();
  CHECK((H - R).norm() <= 1e-10 * H.norm());

  Mat bad = Mat::Identity(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(diagonalize(bad), Error);
}

TEST_CASE("eigenpair residuals and ordering") {
  const auto s = solve_chain(spec(6, 0.7, -0.086, 1.1), 0.8);
  const Mat H = build_hamiltonian(spec(6, 0.7, -0.086, 1.1), 0.8);
  for (int k = 0; k < s.dim(); ++k) {
    const auto v = s.eigenvectors.col(k);
    CHECK((H * v - s.eigenvalues(k) * v).norm() <= 1e-10 * H.norm());
    if (k) CHECK(s.eigenvalues(k) >= s.eigenvalues(k - 1));
  }
}

TEST_CASE("chain parameter validation") {
  CHECK_THROWS(solve_chain(spec(11), 0.0));
  CHECK_THROWS(solve_chain(spec(0), 0.0));
  CHECK_THROWS(solve_chain(spec(2, 1.0, 1.0), 0.0));
  ChainSpec p = spec(2);
  p.boundary = Boundary::periodic;
  CHECK_THROWS(solve_chain(p, 0.0));
  p.n_spins = 4;
  CHECK_NOTHROW(solve_chain(p, 0.0));
}

TEST_CASE("specific heat: free spin and dimer Schottky form") {
  const auto s1 = solve_chain(spec(1), 0.0);
  for (double T : {0.1, 1.0, 10.0}) CHECK(specific_heat(s1, T) == 0.0);
  CHECK_THROWS(specific_heat(s1, 0.0));

  const double J = 0.7;
  const auto s2 = solve_chain(spec(2, J), 0.0);
  for (int k = 0; k <= 40; ++k) {
    const double T = 0.01 * J * std::pow(1e4, k / 40.0);
    // singlet at -3J, triplet at +J: gap 4J, degeneracy ratio 3
    const double x = 4 * J / T;
    const double c = 3 * x * x * std::exp(-x) / std::pow(1 + 3 * std::exp(-x), 2) / 2;
    CHECK(specific_heat(s2, T) == doctest::Approx(c).epsilon(1e-10).scale(1e-300));
  }
}

TEST_CASE("specific heat equals -T d2F/dT2 for n = 7 at 0.5 T") {
  const auto s = solve_chain(spec(7, 0.7), 0.5);
  for (double T : {0.2, 0.7, 2.0}) {
    const double d2 = richardson_d2([&](double t) { return free_energy(s, t); }, T, 1e-2 * T);
    CHECK(specific_heat(s, T) == doctest::Approx(-T * d2 / 7).epsilon(1e-6));
  }
}

TEST_CASE("full spectrum is required for the specific heat") {
  const double J = 0.7;
  auto s = solve_chain(spec(6, J), 0.0);
  const double full = specific_heat(s, J);
  SpectrumED half = s;
  half.eigenvalues = s.eigenvalues.head(s.dim() / 2);
  half.eigenvectors.resize(0, 0);
  const double trunc = specific_heat(half, J);
  CHECK(std::abs(full - trunc) > 1e-3 * full);
}

TEST_CASE("susceptibility matches the field derivative of the magnetization") {
  const double g = 2.004, d = 1e-4;
  const double hk = zeeman_kelvin(1.0, g);
  for (int n = 2; n <= 6; ++n) {
    const ChainSpec c = spec(n, 0.7, -0.086, 0.4);
    for (double B : {0.0, 0.25, 0.6}) {
      const auto s0 = solve_chain(c, B);
      const auto sp = solve_chain(c, B + d);
      // m is odd in B, so at B = 0 the lower point is -m(d)
      const auto sm = solve_chain(c, B > 0 ? B - d : d);
      const double sign = B > 0 ? 1.0 : -1.0;
      for (double T : {0.1, 0.3, 0.7, 2.0, 7.0}) {
        const double fd = (magnetization(sp, T) - sign * magnetization(sm, T)) / (2 * d) / hk;
        CHECK(susceptibility(s0, T, kAxisY) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("susceptibility limits") {
  const auto s1 = solve_chain(spec(1), 0.0);
  for (double T : {0.1, 1.0, 10.0}) CHECK(susceptibility(s1, T, kAxisY) * T == doctest::Approx(1.0).epsilon(1e-12));
  const auto s2 = solve_chain(spec(2, 1.0), 0.0);
  CHECK(susceptibility(s2, 0.02, kAxisY) < 1e-50);
  SpectrumED novec = s2;
  novec.eigenvectors.resize(0, 0);
  CHECK_THROWS(susceptibility(novec, 1.0, kAxisY));
}

TEST_CASE("magnetization: free spin, zero field, brute-force trace") {
  const double g = 2.004;
  const auto s1 = solve_chain(spec(1), 0.3);
  for (double T : {0.1, 1.0}) CHECK(magnetization(s1, T) == doctest::Approx(std::tanh(zeeman_kelvin(0.3, g) / T)));
  const auto s0 = solve_chain(spec(5, 0.7, -0.086, 0.9), 0.0);
  CHECK(std::abs(magnetization(s0, 0.5)) < 1e-12);

  const double B = 8.0, T = 0.5, h = zeeman_kelvin(B, g);
  const auto s5 = solve_chain(spec(5, 0.7), B);
  const double ref = brute_magnetization(brute_hamiltonian(5, 0.7, 0.0, 0.0, h), 5, T);
  CHECK(magnetization(s5, T) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(magnetization(s5, T) < std::tanh(h / T));
}

TEST_CASE("nearest-neighbour correlator") {
  const auto s2 = solve_chain(spec(2, 1.0), 0.0);
  CHECK(correlator_xx(s2, 0.01, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(correlator_xx(s2, 1e5, 0)) < 1e-4);
  CHECK_THROWS(correlator_xx(s2, 1.0, 1));
  const auto s8 = solve_chain(spec(8, 0.7, -0.086, 0.5), 0.2);
  for (double T : {0.05, 0.5, 5.0})
    for (int i = 0; i < 7; ++i) CHECK(std::abs(correlator_xx(s8, T, i)) <= 1.0);
}

TEST_CASE("correlator estimator from chi*T tracks the exact correlator") {
  // -|1 - chiT| follows the exact nearest-neighbour correlator in sign and
  // monotonicity for an isotropic open chain of 8 spins
  const auto s = solve_chain(spec(8, 0.7), 0.0);
  std::vector<double> T;
  for (int k = 0; k <= 20; ++k) T.push_back(0.07 * std::pow(1000.0, k / 20.0));
  const auto r = thermo_sweep(s, T, kAxisY);
  for (std::size_t k = 0; k < T.size(); ++k) {
    const double est = -std::abs(1.0 - r.chi_T[k]);
    CHECK(r.correlator_xx[k] <= 0.0);
    CHECK(est <= 0.0);
    if (k) {
      CHECK(r.correlator_xx[k] >= r.correlator_xx[k - 1]);
      CHECK(est >= -std::abs(1.0 - r.chi_T[k - 1]) - 1e-12);
    }
  }
}

TEST_CASE("thermo sweep agrees with the pointwise functions") {
  const auto s = solve_chain(spec(4, 0.7, -0.086, 0.2), 0.3);
  const std::vector<double> T{0.05, 0.4, 3.0};
  const auto r = thermo_sweep(s, T, kAxisY);
  for (std::size_t k = 0; k < T.size(); ++k) {
    CHECK(r.specific_heat[k] == doctest::Approx(specific_heat(s, T[k])).epsilon(1e-12));
    CHECK(r.chi[k] == doctest::Approx(susceptibility(s, T[k], kAxisY)).epsilon(1e-12));
    CHECK(r.chi_T[k] == doctest::Approx(r.chi[k] * T[k]).epsilon(1e-14));
    CHECK(r.magnetization[k] == doctest::Approx(magnetization(s, T[k])).epsilon(1e-12));
    CHECK(r.specific_heat[k] >= 0.0);
    CHECK(r.chi[k] >= 0.0);
  }
}

TEST_CASE("odd chains keep a Curie tail, even chains lose it") {
  const double J = 0.7, T = 0.01 * J;
  for (int n = 2; n <= 7; ++n) {
    const auto s = solve_chain(spec(n, J), 0.0);
    const double chiT = susceptibility(s, T, kAxisY) * T;
    if (n % 2)
      CHECK(n * chiT == doctest::Approx(1.0).epsilon(0.01));
    else
      CHECK(chiT < 0.01);
  }
}

TEST_CASE("entropy sum rule with the ground-state degeneracy") {
  // integral of c/T from ~0 to >> J is ln 2 minus the residual entropy ln(g0)/n
  for (int n = 1; n <= 8; ++n) {
    const auto s = solve_chain(spec(n, 1.0), 0.0);
    const int N = 4000;
    double S = 0.0;
    double prev = 0.0;
    for (int k = 0; k <= N; ++k) {
      const double lt = std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * k / N;
      const double c = specific_heat(s, std::exp(lt));  // c/T dT = c d(ln T)
      if (k) S += 0.5 * (c + prev) * (std::log(1e3) - std::log(1e-3)) / N;
      prev = c;
    }
    int g0 = 0;
    for (int k = 0; k < s.dim(); ++k) g0 += s.eigenvalues(k) - s.eigenvalues(0) < 1e-9;
    CHECK(S + std::log(static_cast<double>(g0)) / n == doctest::Approx(std::log(2.0)).epsilon(0.02));
    if (n % 2 == 0) CHECK(S == doctest::Approx(std::log(2.0)).epsilon(0.02));
  }
}

TEST_CASE("powder average over psi") {
  const std::vector<double> T{0.1, 0.7, 3.0};
  const auto iso = powder_average_thermo(spec(4, 0.7, 0.0), T, 0.2, 16);
  const auto one = thermo_sweep(solve_chain(spec(4, 0.7, 0.0, 0.0), 0.2), T, kAxisY);
  for (std::size_t k = 0; k < T.size(); ++k) {
    CHECK(iso.specific_heat[k] == doctest::Approx(one.specific_heat[k]).epsilon(1e-12));
    CHECK(iso.chi[k] == doctest::Approx(one.chi[k]).epsilon(1e-12));
  }
  const auto a = powder_average_thermo(spec(4, 0.7, -0.086), T, 0.2, 32);
  const auto b = powder_average_thermo(spec(4, 0.7, -0.086), T, 0.2, 64);
  for (std::size_t k = 0; k < T.size(); ++k) {
    CHECK(a.specific_heat[k] == doctest::Approx(b.specific_heat[k]).epsilon(1e-6));
    CHECK(a.chi[k] == doctest::Approx(b.chi[k]).epsilon(1e-6));
  }
  CHECK_THROWS(powder_average_thermo(spec(2), {}, 0.0, 16));
  CHECK_THROWS(powder_average_thermo(spec(2), T, 0.0, 4));
}

TEST_CASE("n = 7 specific heat has one broad maximum") {
  std::vector<double> T;
  for (int k = 0; k <= 60; ++k) T.push_back(0.02 * std::pow(500.0, k / 60.0));
  const auto r = thermo_sweep(solve_chain(spec(7, 0.7), 0.5), T, kAxisY);
  int maxima = 0;
  for (std::size_t k = 1; k + 1 < T.size(); ++k)
    maxima += r.specific_heat[k] > r.specific_heat[k - 1] && r.specific_heat[k] > r.specific_heat[k + 1];
  CHECK(maxima == 1);
}

TEST_CASE("dilution weights and composite model") {
  const auto w = dilution_weights(0.85, 8);
  REQUIRE(w.size() == 8);
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    sum += w[k];
    if (k) CHECK(w[k] / w[k - 1] == doctest::Approx(0.85));
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

  CompositeModel m;
  m.dimer_J = 0.0;
  m.chain_J = 0.0;
  const auto hi = composite_chiT(m, {100.0});
  CHECK(hi[0] == doctest::Approx(0.85).epsilon(1e-6));
  CHECK(chiT_to_emu(hi[0], 2.004) == doctest::Approx(0.85 * curie_constant_half(2.004)).epsilon(1e-6));

  m.length_weights = {0.5, 0.4};
  CHECK_THROWS(composite_chiT(m, {1.0}));

  // all-even weights freeze out; odd weights leave w_n / n
  const auto even = chain_mixture_chiT({0.0, 0.5, 0.0, 0.5}, 0.7, 2.004, {0.007});
  CHECK(even[0] < 0.01);
  const auto odd = chain_mixture_chiT({0.0, 0.0, 1.0}, 0.7, 2.004, {0.007});
  CHECK(odd[0] == doctest::Approx(1.0 / 3).epsilon(0.01));
}
