#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace spinline::detail {

struct RootResult {
  Eigen::VectorXd x;
  double residual = INFINITY;
  int iterations = 0;
  bool converged = false;
};

// Damped Newton (Levenberg style) for square systems G(x) = 0 with a
// central-difference Jacobian.  Used by the small mean-field solves.
inline RootResult solve_root(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& G,
                             Eigen::VectorXd x, double tol, int max_iter = 200) {
  RootResult r;
  Eigen::VectorXd g = G(x);
  double norm = g.norm();
  double mu = 1e-6;
  const int n = static_cast<int>(x.size());
  for (int it = 0; it < max_iter && std::isfinite(norm); ++it) {
    r.iterations = it;
    if (norm <= tol) break;
    Eigen::MatrixXd Jm(g.size(), n);
    for (int k = 0; k < n; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(k)));
      Eigen::VectorXd xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      Jm.col(k) = (G(xp) - G(xm)) / (2.0 * h);
    }
    const Eigen::MatrixXd JtJ = Jm.transpose() * Jm;
    const Eigen::VectorXd Jtg = Jm.transpose() * g;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += mu * (1.0 + JtJ.diagonal().array());
      const Eigen::VectorXd dx = A.ldlt().solve(-Jtg);
      if (!dx.allFinite()) {
        mu *= 10.0;
        continue;
      }
      const Eigen::VectorXd xn = x + dx;
      const Eigen::VectorXd gn = G(xn);
      const double nn = gn.norm();
      if (std::isfinite(nn) && nn < norm) {
        x = xn;
        g = gn;
        norm = nn;
        mu = std::max(mu / 10.0, 1e-15);
        improved = true;
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }
  r.x = x;
  r.residual = norm;
  r.converged = norm <= tol;
  return r;
}

}  // namespace spinline::detail
