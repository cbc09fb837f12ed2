#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rfm/manifolds.hpp"
#include "rfm/quadrature.hpp"

namespace rfm {

// Constants of the curve measure nu on the flat cylinder. The curve is
//   R = { x = +-(pi - 1/y), y > 1 }
// with density gamma / (4 y^5 |z|^2) per branch with respect to dy. With
// t = 1/y each branch carries weight gamma t^5 / (4 (t^2 (pi - t)^2 + 1)) dt
// on (0, 1].
struct NuConstants {
  double gamma;     // normalization
  double y_nu;      // Euclidean mean height; the Euclidean mean is i y_nu
  double integral;  // 1 / gamma
};
const NuConstants& nu_constants();

// Per-branch density in t = 1/y with gamma = 1.
inline double nu_branch_density_t(double t) {
  const double s = t * (kPi - t);
  return t * t * t * t * t / (4.0 * (s * s + 1.0));
}
// Curve point with height y on branch +1 (x = pi - 1/y) or -1.
ManifoldPoint nu_point(double y, int branch);
// nu({y > threshold}).
double nu_tail_mass(double threshold);
// Inverse CDF of the height under nu; u in [0, 1).
double nu_height_quantile(double u);

// Finite weighted point set standing in for a measure.
struct WeightedPoints {
  std::vector<ManifoldPoint> points;
  std::vector<double> weights;
};

struct PointMass {
  ManifoldPoint atom;
};
struct DiscreteAtoms {
  std::vector<ManifoldPoint> points;
  std::vector<double> weights;
};
// Riemannian-uniform on the geodesic ball.
struct UniformOnBall {
  ManifoldPoint center;
  double radius;
};
// Lebesgue-uniform on an axis-aligned box in R^m.
struct UniformOnBox {
  Eigen::VectorXd lo, hi;
};
// Uniform on the arc [center - halfwidth, center + halfwidth] of the circle.
struct WrappedUniformArc {
  double center;
  double halfwidth;
};
struct CurveDensityNu {
  double gamma;
};
class MeasureSpec;
struct Mixture {
  std::vector<MeasureSpec> components;
  std::vector<double> weights;
};

class MeasureSpec {
 public:
  using Variant =
      std::variant<PointMass, DiscreteAtoms, UniformOnBall, UniformOnBox, WrappedUniformArc, CurveDensityNu, Mixture>;

  static MeasureSpec point_mass(const Manifold& model, const ManifoldPoint& p);
  static MeasureSpec discrete(const Manifold& model, std::vector<ManifoldPoint> points,
                              std::vector<double> weights);
  static MeasureSpec uniform_ball(const Manifold& model, const ManifoldPoint& center, double radius);
  static MeasureSpec uniform_box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static MeasureSpec wrapped_arc(double center, double halfwidth);
  static MeasureSpec nu();
  static MeasureSpec mixture(std::vector<MeasureSpec> components, std::vector<double> weights);
  // alpha nu + (1 - alpha) delta_{i y_nu}.
  static MeasureSpec mu_alpha(double alpha);

  const Manifold& model() const { return model_; }
  const Variant& variant() const { return variant_; }
  std::string type_name() const;
  // Default-resolution product rule, precomputed for balls in dimension 2
  // and boxes; null otherwise.
  const WeightedPoints* product_rule() const { return rule_.get(); }

 private:
  MeasureSpec(Manifold model, Variant v) : model_(model), variant_(std::move(v)) {}
  Manifold model_;
  Variant variant_;
  std::shared_ptr<const WeightedPoints> rule_;
};

struct SampleBatch {
  Manifold model;
  std::vector<ManifoldPoint> points;
  std::uint64_t seed = 0;
  std::size_t n = 0;
};

// Expectation of g under the measure. `kink_reference` is the point whose
// cut relation makes g non-smooth (typically the argument of a Frechet or
// distance functional); continuous parts split their quadrature there.
double expectation(const MeasureSpec& spec, const std::function<double(const ManifoldPoint&)>& g,
                   const ManifoldPoint* kink_reference = nullptr, const QuadratureTolerance& tol = {});
Eigen::VectorXd expectation(const MeasureSpec& spec,
                            const std::function<Eigen::VectorXd(const ManifoldPoint&)>& g, int size,
                            const ManifoldPoint* kink_reference = nullptr,
                            const QuadratureTolerance& tol = {});

// Exact for atoms, a fixed product rule for the continuous variants (`level`
// scales the node count; level 1 is the default resolution).
WeightedPoints discretize(const MeasureSpec& spec, double level = 1.0);

// Probability of {p : region(p)}. Atoms contribute their weights; continuous
// parts scan their parametrization on a fine grid, locate boundaries by
// bisection and integrate the density over the accepted pieces.
double measure_of_region(const MeasureSpec& spec, const std::function<bool(const ManifoldPoint&)>& region);

// Draw i uses the stream derive_seed(seed, "sample", i).
SampleBatch sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed);
ManifoldPoint draw(const MeasureSpec& spec, CounterRng& rng);

nlohmann::json model_to_json(const Manifold& m);
Manifold model_from_json(const nlohmann::json& j);
nlohmann::json point_to_json(const ManifoldPoint& p);
ManifoldPoint point_from_json(const Manifold& m, const nlohmann::json& j);
nlohmann::json measure_to_json(const MeasureSpec& spec);
MeasureSpec measure_from_json(const nlohmann::json& j);

}  // namespace rfm
