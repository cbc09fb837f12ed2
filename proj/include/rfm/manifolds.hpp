#pragma once

#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rfm/error.hpp"
#include "rfm/rng.hpp"

namespace rfm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Membership tolerance for cut loci, in model-intrinsic distance.
inline constexpr double kCutTolerance = 1e-9;

enum class ModelKind { Euclidean, Circle, Sphere, Torus, Cylinder, Hyperbolic, Trumpet };

// Wraps an angle difference into [-pi, pi]. Odd in `d`, so wrapped differences
// are exactly antisymmetric.
inline double wrap_difference(double d) { return std::remainder(d, kTwoPi); }

// Canonical representative of a periodic coordinate in [-pi, pi).
inline double reduce_angle(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r >= kPi) r -= kTwoPi;
  return r;
}

// Canonical coordinates per model:
//   Euclidean  R^m          x in R^m
//   Circle     S^1          angle theta in [-pi, pi)
//   Sphere     S^2          unit vector in R^3
//   Torus      S^1 x S^1    (x, y), both in [-pi, pi)
//   Cylinder   S^1 x R      (x, y), x in [-pi, pi)
//   Hyperbolic upper half   (x, y), y > 0
//   Trumpet    H / 2piZ     (x, y), x in [-pi, pi), y > 0
struct ManifoldPoint {
  ModelKind model = ModelKind::Euclidean;
  Eigen::VectorXd coords;
};

// Tangent components are coefficients in the orthonormal frame at `base`
// (for the half-plane models the frame is (y d/dx, y d/dy)). On the sphere the
// components are the ambient 3-vector, orthogonal to `base`.
struct TangentVector {
  ManifoldPoint base;
  Eigen::VectorXd components;
};

// Coordinates in the normal chart exp_center^{-1}, expressed in the
// orthonormal frame at the chart center.
struct ChartVector {
  Eigen::VectorXd coords;
};

class CutLocusSet;

class Manifold {
 public:
  static Manifold euclidean(int dim);
  static Manifold circle();
  static Manifold sphere();
  static Manifold torus();
  static Manifold cylinder();
  static Manifold hyperbolic();
  static Manifold trumpet();
  // Names: euclidean, circle, sphere, torus, cylinder, hyperbolic, trumpet.
  static Manifold from_name(std::string_view name, int dim = 0);

  ModelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // Length of coordinate and tangent-component vectors.
  int ambient_dim() const { return kind_ == ModelKind::Sphere ? 3 : dim_; }
  double curvature() const;
  bool is_compact() const;
  bool is_quotient() const { return kind_ == ModelKind::Cylinder || kind_ == ModelKind::Trumpet; }
  std::string name() const;
  static constexpr double period() { return kTwoPi; }

  bool operator==(const Manifold& o) const { return kind_ == o.kind_ && dim_ == o.dim_; }

  // Validates and canonicalizes coordinates (angle reduction, sphere
  // renormalization). Throws DomainError on invalid input.
  ManifoldPoint point(Eigen::VectorXd coords) const;
  ManifoldPoint point(std::initializer_list<double> coords) const;
  void validate(const ManifoldPoint& p) const;
  // Model tag and coordinate count only; used on hot paths.
  void check_model(const ManifoldPoint& p) const;

  double distance(const ManifoldPoint& a, const ManifoldPoint& b) const;
  double squared_distance(const ManifoldPoint& a, const ManifoldPoint& b) const {
    const double d = distance(a, b);
    return d * d;
  }

  ManifoldPoint exp_map(const TangentVector& v) const;
  // exp at `base` of the tangent vector with orthonormal-frame coefficients `v`.
  ManifoldPoint exp_frame(const ManifoldPoint& base, const Eigen::VectorXd& v) const;

  // Frame coefficients of the initial velocity of a minimizing geodesic from
  // `base` to `q`, of length distance(base, q). When `q` lies on Cut(base) the
  // branch given by the canonical coordinate reduction is returned (callers
  // that need a guard check cut membership themselves).
  Eigen::VectorXd log_frame(const ManifoldPoint& base, const ManifoldPoint& q) const;

  // Orthonormal frame at `base`: ambient_dim x dim matrix whose columns are
  // the frame vectors in component coordinates (identity off the sphere).
  Eigen::MatrixXd frame(const ManifoldPoint& base) const;
  Eigen::VectorXd to_frame(const TangentVector& v) const;
  TangentVector from_frame(const ManifoldPoint& base, const Eigen::VectorXd& v) const;
  double norm(const TangentVector& v) const { return v.components.norm(); }

  double injectivity_radius(const ManifoldPoint& p) const;

  // sup{ t > 0 : d(p, gamma_u(t)) = t } for a unit vector u.
  double tangent_cut_time(const TangentVector& u) const;

  CutLocusSet cut_locus(const ManifoldPoint& p) const;
  // Union of Cut(q) over the open ball B(p, r).
  CutLocusSet cut_locus_of_ball(const ManifoldPoint& p, double r) const;
  bool on_cut_locus(const ManifoldPoint& p, const ManifoldPoint& q,
                    double tol = kCutTolerance) const {
    return distance_to_cut(p, q) <= tol;
  }
  // Intrinsic distance from q to Cut(p), without building the set.
  double distance_to_cut(const ManifoldPoint& p, const ManifoldPoint& q) const;

  // Gradient at q of d^2(., p): -2 log_q(p).
  TangentVector grad_sq_dist(const ManifoldPoint& q, const ManifoldPoint& p) const;
  Eigen::VectorXd grad_sq_dist_frame(const ManifoldPoint& q, const ManifoldPoint& p) const;
  // Hessian at q of d^2(., p) in the orthonormal frame at q (equivalently in
  // normal coordinates centered at q). Returns 2 I when p == q.
  Eigen::MatrixXd hess_sq_dist(const ManifoldPoint& q, const ManifoldPoint& p) const;

  // Uniform draw from the geodesic ball B(center, radius) (Riemannian volume).
  ManifoldPoint sample_ball(const ManifoldPoint& center, double radius, CounterRng& rng) const;
  // Point on the ball's boundary sphere in frame direction `dir` (unit).
  ManifoldPoint ball_point(const ManifoldPoint& center, double radius,
                           const Eigen::VectorXd& dir) const;

  void require_same(const Manifold& other) const;

 private:
  Manifold(ModelKind kind, int dim) : kind_(kind), dim_(dim) {}

  ModelKind kind_;
  int dim_;
};

// Parametric description of a cut locus (or a union of cut loci), optionally
// thickened by a metric radius. Components:
//   Point          a point or a geodesic ball about it (sphere, circle); the
//                  half-width is a metric radius;
//   VerticalLine   {x = c} with a band of coordinate half-width h in x
//                  (cylinder, trumpet, torus);
//   HorizontalLine {y = c} with coordinate half-width h in y (torus).
// The metric thickening adds the open metric neighborhood of that radius.
class CutLocusSet {
 public:
  enum class Shape { Point, VerticalLine, HorizontalLine };

  struct Component {
    Shape shape;
    ManifoldPoint anchor;  // Point components
    double position = 0;   // line coordinate
    double halfwidth = 0;
  };

  explicit CutLocusSet(Manifold model) : model_(model) {}
  CutLocusSet(Manifold model, std::vector<Component> parts, double metric_radius = 0)
      : model_(model), parts_(std::move(parts)), metric_radius_(metric_radius) {}

  const Manifold& model() const { return model_; }
  const std::vector<Component>& components() const { return parts_; }
  double metric_radius() const { return metric_radius_; }
  bool empty() const { return parts_.empty(); }

  // Intrinsic distance from q to the set; +inf for the empty set.
  double distance_to(const ManifoldPoint& q) const;
  bool contains(const ManifoldPoint& q, double tol = kCutTolerance) const {
    return distance_to(q) <= tol;
  }
  // Open metric r-neighborhood B(this, r).
  CutLocusSet thickened(double r) const;

  // Coordinate half-width in x of a vertical-line component at height y,
  // including the metric thickening (capped at pi).
  double x_halfwidth_at(const Component& c, double y) const;

  std::string describe() const;

 private:
  double distance_to_component(const Component& c, const ManifoldPoint& q) const;

  Manifold model_;
  std::vector<Component> parts_;
  double metric_radius_ = 0;
};

// Normal chart exp_center^{-1} on the ball of `radius` about `center`.
class NormalChart {
 public:
  NormalChart(Manifold model, ManifoldPoint center, double radius);

  const Manifold& model() const { return model_; }
  const ManifoldPoint& center() const { return center_; }
  double radius() const { return radius_; }

  ManifoldPoint to_point(const ChartVector& v) const { return model_.exp_frame(center_, v.coords); }

 private:
  Manifold model_;
  ManifoldPoint center_;
  double radius_;
};

// Chart coordinates of q. Throws CutLocusError when q is outside the chart or
// on Cut(center).
ChartVector log_map(const NormalChart& chart, const ManifoldPoint& q);

// Distance from (x, y) to the vertical geodesic {x = c} in the upper half
// plane: asinh(|x - c| / y).
inline double hyperbolic_distance_to_vertical(double dx, double y) {
  return std::asinh(std::abs(dx) / y);
}

}  // namespace rfm
