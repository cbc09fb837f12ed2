#include "rfm/quadrature.hpp"

#include <map>
#include <mutex>

namespace rfm {

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  if (n < 1) throw DomainError("gauss_legendre: order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Jacobi matrix of the Legendre recurrence; nodes are its eigenvalues and
  // weights 2 v_0^2 from the normalized eigenvectors.
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()[k];
    const double v = es.eigenvectors()(0, k);
    rule.weights[k] = 2.0 * v * v;
  }
  // Polish nodes with Newton on P_n for full double accuracy.
  for (int k = 0; k < n; ++k) {
    double x = rule.nodes[k];
    for (int iter = 0; iter < 3; ++iter) {
      double p0 = 1, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
      rule.nodes[k] = x;
      rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace rfm
