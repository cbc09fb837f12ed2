#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfm/manifolds.hpp"

namespace rfm {

// A neighborhood of Cut(p). Funnel coordinates are x' = x - x_p reduced to
// [-pi, pi) and the absolute height y.
//   MetricBall      B(target, eps), the open metric eps-neighborhood.
//   CylinderFunnel  {pi - x' < 1/|y| < pi or pi + x' < 1/|y| < pi}
//                   U {x' != 0 and |y| pi <= 1}.
//   TrumpetFunnel   with a = (cosh delta - 1) / 2:
//                   {a y > pi} U {0 <= pi + x' < a y <= pi or 0 < pi - x' < a y <= pi}.
// Boundary points of the strict inequalities are outside.
class NeighborhoodSpec {
 public:
  enum class Kind { MetricBall, CylinderFunnel, TrumpetFunnel };

  static NeighborhoodSpec metric_ball(CutLocusSet target, double eps);
  static NeighborhoodSpec cylinder_funnel(const ManifoldPoint& p);
  static NeighborhoodSpec trumpet_funnel(const ManifoldPoint& p, double delta);

  Kind kind() const { return kind_; }
  const CutLocusSet& target() const { return target_; }
  double parameter() const { return param_; }
  bool contains(const ManifoldPoint& q) const;
  // Metric radius used when the same case is rerun as a metric probe: eps
  // for metric balls, delta for the trumpet funnel, and for the cylinder
  // funnel its width 1/50 at the edge of the |y| <= 50 window.
  double derived_eps() const;
  std::string describe() const;
  nlohmann::json to_json() const;

 private:
  NeighborhoodSpec(Kind kind, CutLocusSet target, double param, double x_ref)
      : kind_(kind), target_(std::move(target)), param_(param), x_ref_(x_ref) {}
  Kind kind_;
  CutLocusSet target_;
  double param_;
  double x_ref_;
};

struct ProbeOptions {
  int samples = 10000;
  std::uint64_t seed = 1;
};

struct ProbeEntry {
  double r;
  bool witness_found = false;
  std::optional<ManifoldPoint> witness;
  std::optional<ManifoldPoint> generator;  // ball point whose cut locus holds the witness
  long ball_points = 0;
  long cut_points = 0;
};

struct StabilityProbeResult {
  Manifold model = Manifold::euclidean(1);
  ManifoldPoint p;
  bool stable = false;
  std::optional<ManifoldPoint> witness;
  std::optional<ManifoldPoint> generator;
  double r_used = 0;
  std::vector<ProbeEntry> entries;
  long samples = 0;
  std::string neighborhood;
  nlohmann::json params;
  std::string window;
};

// Candidate points of a cut locus searched by the probes: the point itself,
// or points on each line along the height ladder used for that model.
std::vector<ManifoldPoint> cut_locus_candidates(const CutLocusSet& cut);

// Re-checks a witness: generator in B(p, r), witness on Cut(generator) and in
// cut_locus_of_ball(p, r) to kCutTolerance, and outside the neighborhood.
bool verify_witness(const Manifold& m, const ManifoldPoint& p, double r, const NeighborhoodSpec& nbhd,
                    const ManifoldPoint& generator, const ManifoldPoint& witness);

StabilityProbeResult probe_topological_stability(const Manifold& m, const ManifoldPoint& p,
                                                 const NeighborhoodSpec& nbhd, std::vector<double> r_list,
                                                 const ProbeOptions& options = {});
StabilityProbeResult probe_metric_stability(const Manifold& m, const ManifoldPoint& p, double eps,
                                            std::vector<double> delta_list, const ProbeOptions& options = {});

struct TrumpetWitness {
  ManifoldPoint witness;
  ManifoldPoint generator;
  double distance_to_cut;  // by 1-D minimization along the cut line
  double closed_form;      // asinh(s / y)
  int halvings;
  bool verified;
};
// Point on the half-line x = pi - y0 sinh(r) / 2 of Cut(B(i y0, r)) at
// hyperbolic distance > delta from Cut(i y0) = {x = -pi}. Requires
// 0 < r < asinh(pi / y0).
TrumpetWitness trumpet_witness(double y0, double r, double delta);

// Minimum over y' of the hyperbolic distance from (x, y) to (c, y') by
// golden-section search in log y'.
double distance_to_vertical_by_search(double x, double y, double c, double tol = 1e-8);

struct ImplicationCase {
  Manifold model;
  ManifoldPoint p;
  NeighborhoodSpec nbhd;
  std::vector<double> r_list;
  std::vector<double> delta_list;  // metric probe radii; defaults to r_list
};
struct ImplicationReport {
  std::vector<StabilityProbeResult> topological;
  std::vector<StabilityProbeResult> metric;
  std::vector<bool> implication_holds;
  bool all_hold = true;
};
ImplicationReport stability_implication_check(const std::vector<ImplicationCase>& cases,
                                              const ProbeOptions& options = {});

// Two-sided Hausdorff distance between two line-type (or point-type) sets,
// both sampled over a height window [y_lo, y_hi] (log-spaced on the trumpet).
double hausdorff_distance(const CutLocusSet& a, const CutLocusSet& b, double y_lo, double y_hi, int samples = 201);

nlohmann::json probe_to_json(const StabilityProbeResult& r);

}  // namespace rfm
