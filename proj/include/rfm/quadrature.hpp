#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rfm/error.hpp"

namespace rfm {

struct QuadratureTolerance {
  double abs = 1e-14;
  double rel = 1e-12;
  int max_intervals = 4000;
};

// Gauss-Legendre rule on [-1, 1] (Golub-Welsch), cached per order.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

namespace detail {

inline double max_abs(double v) { return std::abs(v); }
inline double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

template <class V>
struct Panel {
  double a, b;
  V value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
template <class F>
auto kronrod_panel(F& f, double a, double b) {
  using K = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = K::abscissa();
  const auto& wk = K::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  auto f0 = f(c);
  using V = std::decay_t<decltype(f0)>;
  V kron = f0 * wk[0];
  V gauss = f0 * wg[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const V s = f(c + h * xk[i]) + f(c - h * xk[i]);
    kron += s * wk[i];
    if (i % 2 == 0) gauss += s * wg[i / 2];
  }
  kron *= h;
  gauss *= h;
  const V diff = kron - gauss;
  return Panel<V>{a, b, kron, max_abs(diff)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration over consecutive breakpoints
// (sorted, at least two). The worst panel is bisected until the summed error
// estimate is below max(tol.abs, tol.rel * |I|). Works for double and
// Eigen::VectorXd valued integrands.
template <class F>
auto integrate(F&& f, const std::vector<double>& breaks, const QuadratureTolerance& tol = {},
               double* error_out = nullptr) {
  using P = decltype(detail::kronrod_panel(f, 0.0, 1.0));
  std::priority_queue<P> heap;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) heap.push(detail::kronrod_panel(f, breaks[i], breaks[i + 1]));
  }
  if (heap.empty()) throw QuadratureError("integrate: empty integration range");
  auto total = [&](auto& h) {
    auto copy = h;
    auto sum = copy.top().value;
    double err = copy.top().error;
    copy.pop();
    while (!copy.empty()) {
      sum += copy.top().value;
      err += copy.top().error;
      copy.pop();
    }
    return std::make_pair(sum, err);
  };
  auto [sum, err] = total(heap);
  int count = static_cast<int>(heap.size());
  while (err > std::max(tol.abs, tol.rel * detail::max_abs(sum))) {
    if (count >= tol.max_intervals) {
      throw QuadratureError("integrate: no convergence after " + std::to_string(count) +
                            " panels (error estimate " + std::to_string(err) + ")");
    }
    P worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    P left = detail::kronrod_panel(f, worst.a, mid);
    P right = detail::kronrod_panel(f, mid, worst.b);
    sum += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++count;
    // Refresh the running sums now and then to shed cancellation drift.
    if (count % 256 == 0) std::tie(sum, err) = total(heap);
  }
  std::tie(sum, err) = total(heap);
  if (error_out) *error_out = err;
  return sum;
}

template <class F>
auto integrate(F&& f, double a, double b, const QuadratureTolerance& tol = {}) {
  return integrate(std::forward<F>(f), std::vector<double>{a, b}, tol);
}

}  // namespace rfm
