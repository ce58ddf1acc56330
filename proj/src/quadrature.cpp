#include "stdd/quadrature.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <map>
#include <mutex>

#include "stdd/error.hpp"

namespace stdd {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  // legendre_p_zeros returns the nonnegative zeros in increasing order.
  const std::vector<double> half = boost::math::legendre_p_zeros<double>(n);
  QuadratureRule rule;
  rule.nodes.reserve(n);
  rule.weights.reserve(n);
  auto weight = [n](double x) {
    const double dp = boost::math::legendre_p_prime(n, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto it = half.rbegin(); it != half.rend(); ++it) {
    if (*it == 0.0) continue;
    rule.nodes.push_back(-*it);
    rule.weights.push_back(weight(*it));
  }
  for (double x : half) {
    rule.nodes.push_back(x);
    rule.weights.push_back(weight(x));
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "gauss_legendre needs n >= 1");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

QuadratureRule composite_gauss(double a, double b, int panels, int points_per_panel) {
  if (panels < 1 || !(b > a)) {
    throw Error(ErrorKind::InvalidParameter, "composite_gauss needs panels >= 1 and b > a");
  }
  const QuadratureRule ref = gauss_legendre(points_per_panel);
  const double width = (b - a) / panels;
  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * ref.size());
  rule.weights.reserve(rule.nodes.capacity());
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    for (std::size_t q = 0; q < ref.size(); ++q) {
      rule.nodes.push_back(mid + 0.5 * width * ref.nodes[q]);
      rule.weights.push_back(0.5 * width * ref.weights[q]);
    }
  }
  return rule;
}

}  // namespace stdd
