#include "spinline/quadrature.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>

#include "spinline/error.hpp"

namespace spinline {

Quadrature gauss_legendre(int n, double a, double b) {
  require(n >= 1, "gauss_legendre: need at least one node");
  require(b > a, "gauss_legendre: empty interval");
  // boost returns the non-negative zeros in ascending order
  const auto pos = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  x.reserve(n);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (*it != 0.0) x.push_back(-*it);
  for (double z : pos) x.push_back(z);

  Quadrature q;
  const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
  for (double z : x) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.nodes.push_back(mid + half * z);
    q.weights.push_back(half * w);
  }
  return q;
}

}  // namespace spinline
