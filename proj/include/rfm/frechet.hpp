#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rfm/measures.hpp"

namespace rfm {

// Search region for non-compact models: a coordinate box, optionally
// intersected with a geodesic ball.
struct SearchWindow {
  Eigen::VectorXd lo, hi;
  std::optional<ManifoldPoint> ball_center;
  double ball_radius = kInfinity;

  bool contains(const Manifold& m, const ManifoldPoint& p) const;
  static SearchWindow box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  // Box [c - r, c + r] per coordinate intersected with the ball B(c, r);
  // flat and half-plane models only.
  static SearchWindow ball(const Manifold& m, const ManifoldPoint& c, double r);
};

struct FrechetOptions {
  int grid_resolution = 201;
  double gradient_tol = 1e-10;
  int max_iterations = 10000;
  int max_starts = 16;
  double tie_rel = 1e-8;
  // Distinct minimizers closer than this are merged.
  double merge_distance = 1e-6;
  std::optional<SearchWindow> window;
};

struct FrechetResult {
  std::vector<ManifoldPoint> minimizers;
  std::vector<double> values;
  double value = 0;
  int iterations = 0;
  double gradient_norm = 0;
  int grid_resolution = 0;
  int starts = 0;
};

double frechet_function(const ManifoldPoint& q, const MeasureSpec& spec);
// Frame coefficients at q of the gradient of the Frechet function. Terms
// whose cut locus passes through q use the one-sided limit given by the
// canonical log branch.
Eigen::VectorXd frechet_gradient(const ManifoldPoint& q, const MeasureSpec& spec);

FrechetResult frechet_mean_set(const MeasureSpec& spec, const FrechetOptions& options = {});

// Sample Frechet function F_n and its gradient.
double sample_frechet_function(const ManifoldPoint& q, const SampleBatch& batch);
Eigen::VectorXd sample_frechet_gradient(const ManifoldPoint& q, const SampleBatch& batch);

// Minimizer of F_n. Starts: the hint (if any), then grid minima when the
// model is compact or a window is given, otherwise the best sample points.
// Among tied minimizers the lexicographically smallest coordinate vector is
// listed first.
FrechetResult empirical_frechet_mean(const SampleBatch& batch, const std::optional<ManifoldPoint>& chart_hint,
                                     const FrechetOptions& options = {});

// Armijo-backtracking Riemannian gradient descent on an arbitrary objective.
struct DescentResult {
  ManifoldPoint point;
  double value;
  double gradient_norm;
  int iterations;
  // Objective values at accepted iterates (including the start).
  std::vector<double> trace;
};
DescentResult riemannian_descent(const Manifold& m, const ManifoldPoint& start,
                                 const std::function<double(const ManifoldPoint&)>& f,
                                 const std::function<Eigen::VectorXd(const ManifoldPoint&)>& grad,
                                 double gradient_tol, int max_iterations, bool keep_trace = false,
                                 const SearchWindow* window = nullptr);

// Grid points covering the model (or the window), with the neighbour lists
// used to detect discrete local minima.
struct SearchGrid {
  std::vector<ManifoldPoint> points;
  std::vector<std::vector<int>> neighbours;
  int resolution = 0;
};
SearchGrid make_search_grid(const Manifold& m, int resolution, const SearchWindow* window);

struct ConsistencyRow {
  std::size_t n;
  int rep;
  std::uint64_t seed;
  double error_chart;
  double f_value;
  int iterations;
};
std::vector<ConsistencyRow> consistency_curve(const MeasureSpec& spec, const ManifoldPoint& true_mean,
                                              const std::vector<std::size_t>& n_list, int reps,
                                              std::uint64_t seed, const FrechetOptions& options = {});
// Median error_chart per n, in n_list order.
std::vector<double> median_errors(const std::vector<ConsistencyRow>& rows, const std::vector<std::size_t>& n_list);

}  // namespace rfm
