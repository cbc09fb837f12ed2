#include <gtest/gtest.h>

#include "rfm/manifolds.hpp"
#include "support.hpp"

using namespace rfm;
using rfm::test::random_point;

namespace {

bool well_inside(const Manifold& m, const ManifoldPoint& p, const ManifoldPoint& q) {
  return m.distance_to_cut(p, q) > 1e-3;
}

}  // namespace

TEST(Manifolds, ExpLogRoundTrip) {
  for (const Manifold& m : test::all_models()) {
    CounterRng rng(derive_seed(11, m.name(), 0));
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
      const ManifoldPoint p = random_point(m, rng), q = random_point(m, rng);
      if (!well_inside(m, p, q)) continue;
      const Eigen::VectorXd v = m.log_frame(p, q);
      EXPECT_NEAR(v.norm(), m.distance(p, q), 1e-10 * std::max(1.0, v.norm()));
      EXPECT_LT(m.distance(m.exp_frame(p, v), q), 1e-10) << m.name();
      ++checked;
    }
    EXPECT_GT(checked, 900) << m.name();
  }
}

TEST(Manifolds, DistanceSymmetricAndTriangle) {
  for (const Manifold& m : test::all_models()) {
    CounterRng rng(derive_seed(12, m.name(), 0));
    for (int i = 0; i < 2000; ++i) {
      const ManifoldPoint a = random_point(m, rng), b = random_point(m, rng), c = random_point(m, rng);
      ASSERT_EQ(m.distance(a, b), m.distance(b, a)) << m.name();
      EXPECT_LE(m.distance(a, c), m.distance(a, b) + m.distance(b, c) + 1e-12) << m.name();
      EXPECT_EQ(m.distance(a, a), 0.0);
    }
  }
}

TEST(Manifolds, CanonicalCoordinates) {
  const Manifold c = Manifold::circle();
  EXPECT_DOUBLE_EQ(c.point({kPi}).coords[0], -kPi);
  EXPECT_DOUBLE_EQ(c.point({3 * kPi / 2}).coords[0], -kPi / 2);
  EXPECT_THROW(Manifold::hyperbolic().point({0.0, -1.0}), DomainError);
  EXPECT_THROW(Manifold::sphere().point({0.0, 0.0, 0.0}), DomainError);
  EXPECT_THROW(Manifold::sphere().point({0.0, 0.0, 2.0}), DomainError);
  EXPECT_NO_THROW(Manifold::sphere().point({0.0, 0.6, 0.8}));
  EXPECT_THROW(Manifold::circle().distance(c.point({0.0}), Manifold::torus().point({0.0, 0.0})),
               ModelMismatchError);
}

TEST(Manifolds, SphereFrameAtNorthPole) {
  const Manifold s = Manifold::sphere();
  const Eigen::MatrixXd f = s.frame(s.point({0.0, 0.0, 1.0}));
  EXPECT_NEAR((f.col(0) - Eigen::Vector3d::UnitX()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((f.col(1) - Eigen::Vector3d::UnitY()).norm(), 0.0, 1e-15);
}

TEST(Manifolds, KnownDistances) {
  const Manifold h = Manifold::hyperbolic();
  EXPECT_NEAR(h.distance(h.point({0.0, 1.0}), h.point({0.0, std::exp(2.0)})), 2.0, 1e-14);
  const Manifold t = Manifold::trumpet();
  // Across the seam: x = 3 and x = -3 are 2 pi - 6 apart horizontally.
  const double direct = 2 * std::asinh((kTwoPi - 6.0) / 2.0);
  EXPECT_NEAR(t.distance(t.point({3.0, 1.0}), t.point({-3.0, 1.0})), direct, 1e-14);
  const Manifold cy = Manifold::cylinder();
  EXPECT_NEAR(cy.distance(cy.point({3.0, 0.0}), cy.point({-3.0, 1.0})), std::hypot(kTwoPi - 6.0, 1.0), 1e-14);
  const Manifold to = Manifold::torus();
  EXPECT_NEAR(to.distance(to.point({3.0, 3.0}), to.point({-3.0, -3.0})), std::sqrt(2.0) * (kTwoPi - 6.0), 1e-14);
}

TEST(Manifolds, HessianMatchesLongDoubleDifferences) {
  for (const Manifold& m : {Manifold::sphere(), Manifold::hyperbolic(), Manifold::cylinder(), Manifold::trumpet()}) {
    CounterRng rng(derive_seed(13, m.name(), 0));
    int checked = 0;
    while (checked < 100) {
      const ManifoldPoint q = random_point(m, rng), p = random_point(m, rng);
      if (m.distance_to_cut(q, p) < 0.05 || m.distance(q, p) < 1e-3) continue;
      const Eigen::MatrixXd h = m.hess_sq_dist(q, p);
      const Eigen::Matrix2d fd = test::ld::fd_hessian(m, q, p, 1e-5L);
      EXPECT_LT((h - fd).norm() / h.norm(), 1e-5) << m.name();
      ++checked;
    }
  }
}

TEST(Manifolds, HessianEigenvalues) {
  const Manifold s = Manifold::sphere();
  const ManifoldPoint n = s.point({0.0, 0.0, 1.0});
  const double d = 1.0;
  const ManifoldPoint p = s.exp_frame(n, Eigen::Vector2d(d, 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.hess_sq_dist(n, p));
  EXPECT_NEAR(es.eigenvalues()[0], 2 * d / std::tan(d), 1e-12);
  EXPECT_NEAR(es.eigenvalues()[1], 2.0, 1e-12);
  const Manifold h = Manifold::hyperbolic();
  const ManifoldPoint i = h.point({0.0, 1.0});
  const ManifoldPoint q = h.exp_frame(i, Eigen::Vector2d(0.0, d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(h.hess_sq_dist(i, q));
  EXPECT_NEAR(eh.eigenvalues()[0], 2.0, 1e-12);
  EXPECT_NEAR(eh.eigenvalues()[1], 2 * d / std::tanh(d), 1e-12);
}

TEST(Manifolds, DerivativesRefuseCutLocus) {
  const Manifold c = Manifold::circle();
  EXPECT_THROW(c.hess_sq_dist(c.point({0.0}), c.point({-kPi})), CutLocusError);
  EXPECT_THROW(c.grad_sq_dist(c.point({0.0}), c.point({-kPi})), CutLocusError);
  const Manifold cy = Manifold::cylinder();
  try {
    cy.hess_sq_dist(cy.point({-kPi, 5.0}), cy.point({0.0, 0.0}));
    FAIL();
  } catch (const CutLocusError& e) {
    EXPECT_DOUBLE_EQ(e.offending_point()[1], 5.0);
  }
}

TEST(Manifolds, GradientIsMinusTwoLog) {
  for (const Manifold& m : test::all_models()) {
    CounterRng rng(derive_seed(14, m.name(), 0));
    for (int i = 0; i < 50; ++i) {
      const ManifoldPoint q = random_point(m, rng), p = random_point(m, rng);
      if (!well_inside(m, q, p)) continue;
      const Eigen::VectorXd g = m.grad_sq_dist_frame(q, p);
      const double h = 1e-6;
      for (int j = 0; j < m.dim(); ++j) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(m.dim(), j) * h;
        const double fd =
            (m.squared_distance(m.exp_frame(q, e), p) - m.squared_distance(m.exp_frame(q, -e), p)) / (2 * h);
        EXPECT_NEAR(g[j], fd, 1e-6 * std::max(1.0, std::abs(fd))) << m.name();
      }
    }
  }
}

TEST(Manifolds, CutLociAndInjectivity) {
  const Manifold s = Manifold::sphere();
  const ManifoldPoint n = s.point({0.0, 0.0, 1.0});
  EXPECT_TRUE(s.on_cut_locus(n, s.point({0.0, 0.0, -1.0})));
  EXPECT_DOUBLE_EQ(s.injectivity_radius(n), kPi);
  const Manifold cy = Manifold::cylinder();
  const ManifoldPoint p = cy.point({0.5, 2.0});
  EXPECT_TRUE(cy.cut_locus(p).contains(cy.point({0.5 - kPi, -40.0})));
  EXPECT_NEAR(cy.distance_to_cut(p, cy.point({0.0, 7.0})), kPi - 0.5, 1e-15);
  const Manifold t = Manifold::trumpet();
  EXPECT_NEAR(t.injectivity_radius(t.point({0.0, 2.0})), std::asinh(kPi / 2.0), 1e-15);
  EXPECT_TRUE(std::isinf(Manifold::hyperbolic().injectivity_radius(Manifold::hyperbolic().point({0.0, 1.0}))));
  EXPECT_TRUE(Manifold::euclidean(2).cut_locus(Manifold::euclidean(2).point({0.0, 0.0})).empty());
  const Manifold to = Manifold::torus();
  EXPECT_EQ(to.cut_locus(to.point({0.0, 0.0})).components().size(), 2u);
}

TEST(Manifolds, DistanceToCutMatchesSet) {
  for (const Manifold& m : {Manifold::circle(), Manifold::sphere(), Manifold::torus(), Manifold::cylinder(),
                            Manifold::trumpet()}) {
    CounterRng rng(derive_seed(15, m.name(), 0));
    for (int i = 0; i < 200; ++i) {
      const ManifoldPoint p = random_point(m, rng), q = random_point(m, rng);
      EXPECT_NEAR(m.distance_to_cut(p, q), m.cut_locus(p).distance_to(q), 1e-12) << m.name();
    }
  }
}

TEST(Manifolds, TangentCutTime) {
  const Manifold cy = Manifold::cylinder();
  const ManifoldPoint p = cy.point({0.0, 0.0});
  EXPECT_NEAR(cy.tangent_cut_time(cy.from_frame(p, Eigen::Vector2d(1.0, 0.0))), kPi, 1e-15);
  EXPECT_TRUE(std::isinf(cy.tangent_cut_time(cy.from_frame(p, Eigen::Vector2d(0.0, 1.0)))));
  EXPECT_NEAR(cy.tangent_cut_time(cy.from_frame(p, Eigen::Vector2d(0.6, 0.8))), kPi / 0.6, 1e-14);
}

TEST(Manifolds, CutLocusOfBall) {
  const Manifold cy = Manifold::cylinder();
  const ManifoldPoint p = cy.point({0.0, 1.0});
  for (double r : {0.1, 0.5, 1.0}) {
    const CutLocusSet band = cy.cut_locus_of_ball(p, r);
    EXPECT_TRUE(band.contains(cy.point({kPi - 0.99 * r, 17.0})));
    EXPECT_FALSE(band.contains(cy.point({kPi - 1.01 * r, 17.0})));
  }
  const Manifold s = Manifold::sphere();
  const CutLocusSet cap = s.cut_locus_of_ball(s.point({0.0, 0.0, 1.0}), 0.3);
  EXPECT_TRUE(cap.contains(s.point({std::sin(0.29), 0.0, -std::cos(0.29)})));
  EXPECT_FALSE(cap.contains(s.point({std::sin(0.31), 0.0, -std::cos(0.31)})));
  const Manifold t = Manifold::trumpet();
  const CutLocusSet tb = t.cut_locus_of_ball(t.point({0.0, 1.0}), 0.1);
  // Coordinate half-width y0 sinh r is the same at every height.
  EXPECT_NEAR(tb.x_halfwidth_at(tb.components().front(), 5.0), std::sinh(0.1), 1e-15);
}

TEST(Manifolds, NormalChart) {
  const Manifold s = Manifold::sphere();
  const ManifoldPoint n = s.point({0.0, 0.0, 1.0});
  const NormalChart chart(s, n, 1.0);
  const ChartVector v = log_map(chart, s.exp_frame(n, Eigen::Vector2d(0.3, -0.4)));
  EXPECT_NEAR(v.coords[0], 0.3, 1e-14);
  EXPECT_NEAR(v.coords[1], -0.4, 1e-14);
  EXPECT_THROW(log_map(chart, s.point({0.0, 0.0, -1.0})), CutLocusError);
  EXPECT_THROW(NormalChart(s, n, 4.0), DomainError);
}

TEST(Manifolds, BallSamplingStaysInBall) {
  for (const Manifold& m : test::all_models()) {
    CounterRng rng(derive_seed(16, m.name(), 0));
    const ManifoldPoint c = random_point(m, rng);
    for (int i = 0; i < 200; ++i) {
      CounterRng r2(derive_seed(16, "ball", i));
      EXPECT_LT(m.distance(c, m.sample_ball(c, 0.7, r2)), 0.7 + 1e-12) << m.name();
    }
  }
}

TEST(Manifolds, HyperbolicDistanceToVertical) {
  const Manifold h = Manifold::hyperbolic();
  const double dx = 0.7, y = 0.3;
  double best = kInfinity;
  for (int k = -4000; k <= 4000; ++k) {
    best = std::min(best, h.distance(h.point({dx, y}), h.point({0.0, y * std::exp(k * 1e-3)})));
  }
  EXPECT_NEAR(hyperbolic_distance_to_vertical(dx, y), best, 1e-6);
}
