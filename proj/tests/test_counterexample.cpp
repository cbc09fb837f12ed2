#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rfm/counterexample.hpp"

using namespace rfm;

namespace {

double gamma_nu() { return nu_constants().gamma; }

double t_density(double t) {
  const double s = t * (kPi - t);
  return std::pow(t, 5) / (4.0 * (s * s + 1.0));
}

// F_1(x + iy) in t = 1/y, split where the wrapped x difference jumps
// (t = |x| on one branch). Adaptive Gauss-Kronrod, or a fixed 40-point Gauss
// rule on 8 panels per piece for the dense grid.
double oracle_f1(double x, double y, bool fixed = false) {
  auto term = [&](double t) {
    double acc = 0;
    for (int b : {-1, 1}) {
      const double dx = std::remainder(x - b * (kPi - t), 2 * kPi);
      const double dy = y - 1.0 / t;
      acc += (dx * dx + dy * dy) * t_density(t);
    }
    return acc;
  };
  auto piece = [&](double a, double b) {
    if (!fixed) return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(term, a, b, 15, 1e-13);
    double v = 0;
    for (int k = 0; k < 8; ++k) {
      v += boost::math::quadrature::gauss<double, 40>::integrate(term, a + (b - a) * k / 8, a + (b - a) * (k + 1) / 8);
    }
    return v;
  };
  const double k = std::abs(x);
  const double v = (k > 0 && k < 1) ? piece(0.0, k) + piece(k, 1.0) : piece(0.0, 1.0);
  return gamma_nu() * v;
}

// Dense oracle for sup_{B_r} F_1: 401 x 401 box grid clipped to the disc,
// plus the boundary circle at 1601 angles with golden-section refinement.
double oracle_a_r(double r) {
  const double yc = nu_constants().y_nu;
  double best = 0;
  const int n = 401;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = -r + 2 * r * i / (n - 1), y = yc - r + 2 * r * j / (n - 1);
      if (x * x + (y - yc) * (y - yc) > r * r) continue;
      best = std::max(best, oracle_f1(x, y, true));
    }
  }
  auto ring = [&](double th) { return oracle_f1(r * std::cos(th), yc + r * std::sin(th)); };
  const int m = 1601;
  int arg = 0;
  double top = -1;
  for (int k = 0; k < m; ++k) {
    const double v = ring(2 * kPi * k / m);
    if (v > top) top = v, arg = k;
  }
  double a = 2 * kPi * (arg - 1) / m, b = 2 * kPi * (arg + 1) / m;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 60; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (ring(c) > ring(d)) b = d; else a = c;
  }
  return std::max({best, top, ring((a + b) / 2)});
}

// Euclidean tail part of F^C: gamma * sum over branches of
// int_{1/eps}^inf |w - p(y)|^2 dy / (4 y^5 |p(y)|^2).
double oracle_tail(double wx, double wy, double eps) {
  boost::math::quadrature::exp_sinh<double> es;
  auto f = [&](double s) {
    const double y = 1.0 / eps + s;
    double acc = 0;
    for (int b : {-1, 1}) {
      const double x = b * (kPi - 1.0 / y);
      acc += ((wx - x) * (wx - x) + (wy - y) * (wy - y)) / (4 * std::pow(y, 5) * (x * x + y * y));
    }
    return acc;
  };
  return gamma_nu() * es.integrate(f);
}

double oracle_nu_tail(double y) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return gamma_nu() * 2.0 * GK::integrate(t_density, 0.0, std::min(1.0, 1.0 / y), 15, 1e-14);
}

}  // namespace

TEST(Counterexample, F1MatchesOracle) {
  for (auto [x, y] : {std::pair{0.0, 1.25}, {0.3, 1.0}, {-0.45, 1.5}, {0.2, 0.8}, {1.5, 3.0}}) {
    const double v = f_one(rfm::Manifold::cylinder().point({x, y}));
    EXPECT_NEAR(v, oracle_f1(x, y), 1e-9 * v) << x << " " << y;
    EXPECT_NEAR(oracle_f1(x, y, true), oracle_f1(x, y), 1e-10 * v) << x << " " << y;
  }
}

TEST(Counterexample, ArMatchesDenseOracle) {
  const ArEstimate a = compute_a_r(0.5);
  const double o = oracle_a_r(0.5);
  EXPECT_NEAR(a.lower, o, 1e-4);
  EXPECT_GE(a.upper, a.lower);
  EXPECT_GE(a.upper + 1e-12, o);
  EXPECT_GE(a.lower, f_one(nu_mean_point()));
  EXPECT_GE(compute_a_r(1.0).lower, a.lower);
  EXPECT_GE(a.lower, compute_a_r(0.2).lower);
}

TEST(Counterexample, Threshold) {
  const ArEstimate a = compute_a_r(0.5);
  const double t = alpha_threshold(0.5);
  EXPECT_GT(t, 0);
  EXPECT_LT(t, 1);
  EXPECT_DOUBLE_EQ(t, alpha_threshold(0.5, a.upper));
  EXPECT_GE(alpha_threshold(0.5, a.upper), alpha_threshold(0.5, 2 * a.upper));
  EXPECT_GT(alpha_threshold(0.5, a.upper), alpha_threshold(0.5, 1e4));
  const double K = 2 * gamma_nu() * (1 + (std::pow(nu_constants().y_nu, 2) + 0.25) / std::pow(kPi - 1, 2));
  EXPECT_NEAR(tail_constant(0.5), K, 1e-12 * K);
  EXPECT_DOUBLE_EQ(t, std::min(0.25 / (0.25 + a.upper), 1 / (1 + K)));
}

TEST(Counterexample, PointMassMeanIsExact) {
  CounterexampleConfig cfg;
  cfg.mean_grid = 41;
  cfg.location_grid = 41;
  const MeanLocationReport m = verify_mean_location(cfg, 0.0);
  EXPECT_TRUE(m.passed);
  EXPECT_LT(m.distance_to_iy_nu, 1e-8);
  EXPECT_TRUE(m.strict_on_grid);
}

TEST(Counterexample, HalfThresholdMean) {
  CounterexampleConfig cfg;
  cfg.mean_grid = 61;
  cfg.location_grid = 61;
  const MeanLocationReport m = verify_mean_location(cfg, alpha_threshold(cfg.r) / 2);
  EXPECT_TRUE(m.passed);
  EXPECT_TRUE(m.matches_iy_nu);
  EXPECT_LT(m.distance_to_iy_nu, 1e-4);
  EXPECT_GT(m.min_gap, 0);
  EXPECT_TRUE(m.global_in_ball);
}

TEST(Counterexample, TailBoundAgainstQuadrature) {
  const ManifoldPoint c = nu_mean_point();
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    const double o = oracle_tail(0.0, c.coords[1], eps);
    EXPECT_NEAR(tail_functional(c, eps), o, 1e-9 * o) << eps;
    const double w2 = c.coords[1] * c.coords[1];
    EXPECT_LE(o, 2 * gamma_nu() * (1 + w2 / std::pow(kPi - 1, 2)) * std::pow(eps, 4)) << eps;
  }
  const ManifoldPoint w = rfm::Manifold::cylinder().point({0.3, 1.1});
  EXPECT_NEAR(tail_functional(w, 0.1), oracle_tail(0.3, 1.1, 0.1), 1e-9 * oracle_tail(0.3, 1.1, 0.1));
  const TailBoundReport r = verify_tail_bound(c, {0.2, 0.1, 0.05, 0.02, 0.01, 0.005});
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.slope, 4.0, 0.1);
  for (const auto& row : r.rows) EXPECT_LE(row.ratio, 1.0);
  EXPECT_LT(tail_functional(c, 1e-3), 1e-9);
}

TEST(Counterexample, ConditionC) {
  EXPECT_FALSE(in_condition_c_region(nu_mean_point()));
  for (double y : {1.001, 1.5, 10.0, 1e6}) {
    EXPECT_FALSE(in_condition_c_region(nu_point(y, 1))) << y;
    EXPECT_FALSE(in_condition_c_region(nu_point(y, -1))) << y;
  }
  const Manifold cyl = Manifold::cylinder();
  EXPECT_TRUE(in_condition_c_region(cyl.point({-kPi, 5.0})));
  EXPECT_TRUE(in_condition_c_region(cyl.point({3.0, 0.5})));
  CounterexampleConfig cfg;
  cfg.condition_c_samples = 100000;
  const ConditionCReport r = verify_condition_C(cfg, 0.01);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.mass, 1e-12);
  EXPECT_EQ(r.samples_inside, 0);
  EXPECT_EQ(r.samples, 100000);
}

TEST(Counterexample, A2bFailureMasses) {
  CounterexampleConfig cfg;
  cfg.a2b_radii = {0.05, 0.1, 0.3, 0.9, 3.0};
  const double alpha = 0.01;
  const A2bFailureReport r = verify_a2b_failure(cfg, alpha);
  EXPECT_TRUE(r.passed);
  ASSERT_EQ(r.rows.size(), 5u);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const double o = alpha * oracle_nu_tail(1.0 / r.rows[i].r);
    EXPECT_NEAR(r.rows[i].mass, o, 1e-10 * o) << r.rows[i].r;
    EXPECT_GT(r.rows[i].mass, 0);
    if (i > 0) EXPECT_GT(r.rows[i].mass, r.rows[i - 1].mass);
  }
  EXPECT_GT(r.rows.back().mass, 0.99 * alpha);
}

TEST(Counterexample, ContradictionChain) {
  CounterexampleConfig cfg;
  cfg.chain_points = 200;
  const ChainReport c = verify_contradiction_chain(cfg, alpha_threshold(cfg.r) / 2);
  EXPECT_TRUE(c.passed);
  EXPECT_EQ(c.points, 200);
  EXPECT_GT(c.min_margin[2], 0);
  EXPECT_GT(c.min_margin[3], 0);
  EXPECT_LT(c.max_f_mismatch, 1e-8);
}

TEST(Counterexample, ConfigJson) {
  CounterexampleConfig cfg;
  cfg.r = 0.4;
  cfg.alpha = 0.001;
  cfg.seed = 9;
  const nlohmann::json j = counterexample_config_to_json(cfg);
  EXPECT_EQ(counterexample_config_to_json(counterexample_config_from_json(j)), j);
  nlohmann::json bad = j;
  bad["bogus"] = 1;
  EXPECT_THROW(counterexample_config_from_json(bad), ConfigError);
  bad = j;
  bad["r"] = 4.0;
  EXPECT_THROW(counterexample_config_from_json(bad), ConfigError);
}
