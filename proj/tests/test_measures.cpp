#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rfm/measures.hpp"

using namespace rfm;
using nlohmann::json;

namespace {

// Per-branch density of nu in the height y, with gamma = 1:
// 1 / (4 y^5 |z|^2), |z|^2 = (pi - 1/y)^2 + y^2.
double height_density(double y) {
  const double x = kPi - 1.0 / y;
  return 1.0 / (4.0 * std::pow(y, 5) * (x * x + y * y));
}

double oracle_gamma() {
  boost::math::quadrature::exp_sinh<double> es;
  return 1.0 / (2.0 * es.integrate([](double s) { return height_density(1.0 + s); }));
}

double oracle_y_nu() {
  boost::math::quadrature::exp_sinh<double> es;
  return oracle_gamma() * 2.0 * es.integrate([](double s) { return (1.0 + s) * height_density(1.0 + s); });
}

}  // namespace

TEST(Nu, NormalizationMatchesOracle) {
  const auto& c = nu_constants();
  EXPECT_NEAR(c.gamma, oracle_gamma(), 1e-10 * c.gamma);
  EXPECT_NEAR(c.gamma, 56.1116768224276, 1e-9);
  EXPECT_NEAR(c.gamma * c.integral, 1.0, 1e-13);
}

TEST(Nu, MeanHeightMatchesOracle) {
  EXPECT_NEAR(nu_constants().y_nu, oracle_y_nu(), 1e-11);
  EXPECT_NEAR(nu_constants().y_nu, 1.25034155245154, 1e-12);
}

TEST(Nu, EuclideanMeanIsOnImaginaryAxis) {
  const MeasureSpec nu = MeasureSpec::nu();
  const double mean_x = expectation(nu, [](const ManifoldPoint& p) { return p.coords[0]; });
  const double mean_y = expectation(nu, [](const ManifoldPoint& p) { return p.coords[1]; });
  EXPECT_NEAR(mean_x, 0.0, 1e-14);
  EXPECT_NEAR(mean_y, nu_constants().y_nu, 1e-12);
  EXPECT_NEAR(expectation(nu, [](const ManifoldPoint&) { return 1.0; }), 1.0, 1e-13);
}

TEST(Nu, TailMassAndQuantile) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double y : {1.5, 2.0, 10.0, 100.0}) {
    // Tail in t = 1/y on (0, 1/y).
    const double tail = ts.integrate([](double t) { return 2.0 * nu_branch_density_t(t); }, 0.0, 1.0 / y);
    EXPECT_NEAR(nu_tail_mass(y), nu_constants().gamma * tail, 1e-12) << y;
  }
  for (double u : {0.01, 0.3, 0.5, 0.9, 0.999, 0.999999}) {
    EXPECT_NEAR(nu_tail_mass(nu_height_quantile(u)), 1.0 - u, 1e-11) << u;
  }
  EXPECT_EQ(nu_tail_mass(1.0), 1.0);
}

TEST(Nu, SamplesLieOnCurve) {
  const SampleBatch b = sample(MeasureSpec::nu(), 20000, 3);
  double mean_y = 0;
  for (const auto& p : b.points) {
    const double y = p.coords[1];
    ASSERT_GT(y, 1.0);
    EXPECT_NEAR(kPi - std::abs(p.coords[0]), 1.0 / y, 1e-14);
    mean_y += y / b.points.size();
  }
  EXPECT_NEAR(mean_y, nu_constants().y_nu, 0.01);
}

TEST(Measures, SamplingIsDeterministicPerIndex) {
  const MeasureSpec arc = MeasureSpec::wrapped_arc(0.0, 1.0);
  const SampleBatch a = sample(arc, 100, 9), b = sample(arc, 50, 9);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.points[i].coords[0], b.points[i].coords[0]);
  const SampleBatch c = sample(arc, 50, 10);
  EXPECT_NE(a.points[0].coords[0], c.points[0].coords[0]);
}

TEST(Measures, ArcMoments) {
  const MeasureSpec arc = MeasureSpec::wrapped_arc(0.0, 1.0);
  EXPECT_NEAR(expectation(arc, [](const ManifoldPoint& p) { return p.coords[0] * p.coords[0]; }), 1.0 / 3.0, 1e-14);
  // Arc across the seam.
  const MeasureSpec seam = MeasureSpec::wrapped_arc(kPi, 0.5);
  const double m = expectation(seam, [](const ManifoldPoint& p) { return std::cos(p.coords[0]); });
  EXPECT_NEAR(m, -std::sin(0.5) / 0.5, 1e-14);
}

TEST(Measures, BoxAndBallRules) {
  const MeasureSpec box = MeasureSpec::uniform_box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  EXPECT_NEAR(expectation(box, [](const ManifoldPoint& p) { return p.coords[0] * p.coords[0]; }), 1.0 / 3.0, 1e-14);
  const Manifold s = Manifold::sphere();
  const MeasureSpec ball = MeasureSpec::uniform_ball(s, s.point({0.0, 0.0, 1.0}), 0.5);
  // E[rho^2] for the geodesic cap of radius R.
  const double R = 0.5;
  const double er2 = (-R * R * std::cos(R) + 2 * R * std::sin(R) + 2 * std::cos(R) - 2) / (1 - std::cos(R));
  const ManifoldPoint n = s.point({0.0, 0.0, 1.0});
  EXPECT_NEAR(expectation(ball, [&](const ManifoldPoint& p) { return s.squared_distance(n, p); }), er2, 1e-12);
  const Manifold e = Manifold::euclidean(2);
  const MeasureSpec disc = MeasureSpec::uniform_ball(e, e.point({1.0, 2.0}), 2.0);
  EXPECT_NEAR(expectation(disc, [&](const ManifoldPoint& p) { return (p.coords - Eigen::Vector2d(1, 2)).squaredNorm(); }),
              2.0, 1e-12);
}

TEST(Measures, DiscretizeSumsToOne) {
  const Manifold s = Manifold::sphere();
  for (const MeasureSpec& m :
       {MeasureSpec::nu(), MeasureSpec::wrapped_arc(1.0, 0.2), MeasureSpec::mu_alpha(0.3),
        MeasureSpec::uniform_ball(s, s.point({1.0, 0.0, 0.0}), 0.4),
        MeasureSpec::uniform_box(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 2, 3))}) {
    const WeightedPoints wp = discretize(m, 0.5);
    double sum = 0;
    for (double w : wp.weights) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12) << m.type_name();
  }
}

TEST(Measures, RegionMass) {
  const MeasureSpec arc = MeasureSpec::wrapped_arc(0.0, 1.0);
  EXPECT_NEAR(measure_of_region(arc, [](const ManifoldPoint& p) { return p.coords[0] > 0.5; }), 0.25, 1e-12);
  EXPECT_NEAR(measure_of_region(MeasureSpec::nu(), [](const ManifoldPoint& p) { return p.coords[1] > 2.0; }),
              nu_tail_mass(2.0), 1e-12);
  const MeasureSpec mu = MeasureSpec::mu_alpha(0.25);
  EXPECT_NEAR(measure_of_region(mu, [](const ManifoldPoint& p) { return std::abs(p.coords[0]) < 1e-9; }), 0.75, 1e-15);
}

TEST(Measures, ValidationErrors) {
  const Manifold c = Manifold::circle();
  EXPECT_THROW(MeasureSpec::wrapped_arc(0.0, 4.0), DomainError);
  EXPECT_THROW(MeasureSpec::mu_alpha(1.5), DomainError);
  EXPECT_THROW(MeasureSpec::discrete(c, {c.point({0.0})}, {0.5}), DomainError);
  EXPECT_THROW(MeasureSpec::mixture({MeasureSpec::nu(), MeasureSpec::wrapped_arc(0, 1)}, {0.5, 0.5}),
               ModelMismatchError);
}

TEST(MeasureJson, RoundTrip) {
  const Manifold s = Manifold::sphere();
  for (const MeasureSpec& m :
       {MeasureSpec::nu(), MeasureSpec::wrapped_arc(1.0, 0.2), MeasureSpec::mu_alpha(0.3),
        MeasureSpec::uniform_ball(s, s.point({1.0, 0.0, 0.0}), 0.4),
        MeasureSpec::uniform_box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2)),
        MeasureSpec::point_mass(s, s.point({0.0, 1.0, 0.0}))}) {
    const json j = measure_to_json(m);
    EXPECT_EQ(measure_to_json(measure_from_json(j)), j) << j.dump();
  }
}

TEST(MeasureJson, RejectsUnknownFields) {
  EXPECT_THROW(measure_from_json(json::parse(R"({"type":"wrapped_uniform_arc","center":0,"halfwidth":1,"x":2})")),
               ConfigError);
  EXPECT_THROW(measure_from_json(json::parse(R"({"type":"nope"})")), ConfigError);
  EXPECT_THROW(measure_from_json(json::parse(R"({"type":"curve_density_nu","gamma":3})")), ConfigError);
  EXPECT_NO_THROW(measure_from_json(json::parse(R"({"type":"curve_density_nu"})")));
}
