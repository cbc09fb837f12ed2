#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfm/clt.hpp"
#include "rfm/frechet.hpp"

namespace rfm {

// The mixture mu_alpha = alpha nu + (1 - alpha) delta_{i y_nu} on the flat
// cylinder, with B_r the ball of radius r about i y_nu.
struct CounterexampleConfig {
  double r = 0.5;
  std::optional<double> alpha;  // defaults to half the threshold
  QuadratureTolerance tolerance{};
  int a_r_grid = 101;
  int mean_grid = 201;
  int location_grid = 201;
  double location_exclusion = 1e-3;
  double mean_tolerance = 1e-4;
  Eigen::Vector2d window_lo{-kPi, 0.1};
  Eigen::Vector2d window_hi{kPi, 20.0};
  std::vector<double> tail_eps{0.2, 0.1, 0.05, 0.02, 0.01, 0.005};
  std::vector<double> a2b_radii{0.05, 0.1, 0.3};
  long condition_c_samples = 1000000;
  int chain_points = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

ManifoldPoint nu_mean_point();

// F_1 = Frechet function of nu on the cylinder.
double f_one(const ManifoldPoint& w);

struct ArEstimate {
  double lower;  // best value found (grid + ascent); a lower bound on the sup
  double upper;  // Lipschitz bound: sqrt(F_1) is 1-Lipschitz
  double gap;
  ManifoldPoint argmax;
  int grid;
  int evaluations;
};
ArEstimate compute_a_r(double r, int grid = 101);

// min(r^2 / (r^2 + a_r), 1 / (1 + K)) with K = 2 gamma (1 + (y_nu^2 + r^2) / (pi - 1)^2).
double alpha_threshold(double r, double a_r);
double alpha_threshold(double r);
double tail_constant(double r);

struct MeanLocationReport {
  double alpha;
  ManifoldPoint mean;
  std::vector<ManifoldPoint> minimizers;
  double distance_to_iy_nu;
  bool matches_iy_nu;
  double f_at_iy_nu;
  double min_gap;  // min over the grid of F_alpha(w) - F_alpha(i y_nu)
  int grid_points;
  bool strict_on_grid;
  // Minimizer over the whole window [window_lo, window_hi].
  ManifoldPoint global_minimizer;
  bool global_in_ball;
  bool passed;
};
MeanLocationReport verify_mean_location(const CounterexampleConfig& cfg, double alpha);

struct TailRow {
  double eps;
  double integral;  // F^C of the tail part nu restricted to y > 1/eps
  double bound;     // 2 gamma (1 + |w|^2 / (pi - 1)^2) eps^4
  double ratio = 0;
  bool holds = false;
};
struct TailBoundReport {
  ManifoldPoint w;
  std::vector<TailRow> rows;
  double slope;  // log-log slope of the integral between the decade [0.005, 0.05]
  bool slope_ok;
  bool passed;
};
// Euclidean Frechet contribution of nu on {y > 1/eps}, unnormalized by the
// tail mass.
double tail_functional(const ManifoldPoint& w, double eps, const QuadratureTolerance& tol = {});
TailBoundReport verify_tail_bound(const ManifoldPoint& w, const std::vector<double>& eps_list,
                                  const QuadratureTolerance& tol = {});

// W = {pi - |x| < min(1/(2y), 1), y > 1} U {pi - |x| < 1, y <= 1}.
bool in_condition_c_region(const ManifoldPoint& q);
struct ConditionCReport {
  std::string w_description;
  double mass;
  long samples;
  long samples_inside;
  bool passed;
};
ConditionCReport verify_condition_C(const CounterexampleConfig& cfg, double alpha);

struct A2bRow {
  double r;
  double mass;
  double expected;  // alpha nu(y > 1/r)
  std::vector<ManifoldPoint> generators;
  std::vector<double> cut_line_x;
};
struct A2bFailureReport {
  std::vector<A2bRow> rows;
  bool passed;
};
A2bFailureReport verify_a2b_failure(const CounterexampleConfig& cfg, double alpha);

// Links of the final inequality chain at w with eps = |Re w|:
//   L0 = F_alpha(w) = (1-a) |w - i y_nu|^2 + a (F_{nu_eps}(w) + F_{nu~_eps}(w))
//   L1 = (1-a) |w - i y_nu|^2 + a F^C_{nu_eps}(w)
//   L2 = (1-a) eps^2 + a F^C_1(w) - a K eps^4
//   L3 = a F^C_1(i y_nu) + (1-a)(eps^2 - eps^4)
//   L4 = F_alpha(i y_nu)
// with L0 >= L1 >= L2 > L3 > L4 required. F without superscript uses the
// cylinder metric, F^C the Euclidean one.
struct ChainLinks {
  double eps;
  double l0, l1, l2, l3, l4;
  double cyl_head, euc_head;  // F_{nu_eps} and F^C_{nu_eps}
  double f_alpha;             // frechet_function(w, mu_alpha)
};
ChainLinks chain_links(const ManifoldPoint& w, double alpha, double r, const QuadratureTolerance& tol = {});
struct ChainReport {
  int points;
  double min_margin[4];
  double max_head_mismatch;
  double max_f_mismatch;
  bool passed;
};
ChainReport verify_contradiction_chain(const CounterexampleConfig& cfg, double alpha);

struct CounterexampleReport {
  double gamma, y_nu, normalization;
  bool normalization_ok;
  ArEstimate a_r;
  double threshold;
  double alpha;
  MeanLocationReport mean;
  std::vector<TailBoundReport> tails;
  ConditionCReport condition_c;
  A2bFailureReport a2b;
  ChainReport chain;
  bool passed;
};
CounterexampleReport run_counterexample(const CounterexampleConfig& cfg);

nlohmann::json counterexample_to_json(const CounterexampleReport& r, const CounterexampleConfig& cfg);
nlohmann::json counterexample_config_to_json(const CounterexampleConfig& cfg);
// Rejects unknown fields with ConfigError.
CounterexampleConfig counterexample_config_from_json(const nlohmann::json& j);

}  // namespace rfm
