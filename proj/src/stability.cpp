#include "rfm/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rfm {

using nlohmann::json;

NeighborhoodSpec NeighborhoodSpec::metric_ball(CutLocusSet target, double eps) {
  if (!(eps > 0)) throw DomainError("metric_ball: eps must be positive");
  return NeighborhoodSpec(Kind::MetricBall, std::move(target), eps, 0);
}

NeighborhoodSpec NeighborhoodSpec::cylinder_funnel(const ManifoldPoint& p) {
  const Manifold m = Manifold::cylinder();
  m.validate(p);
  return NeighborhoodSpec(Kind::CylinderFunnel, m.cut_locus(p), 0, p.coords[0]);
}

NeighborhoodSpec NeighborhoodSpec::trumpet_funnel(const ManifoldPoint& p, double delta) {
  const Manifold m = Manifold::trumpet();
  m.validate(p);
  if (!(delta > 0)) throw DomainError("trumpet_funnel: delta must be positive");
  return NeighborhoodSpec(Kind::TrumpetFunnel, m.cut_locus(p), delta, p.coords[0]);
}

bool NeighborhoodSpec::contains(const ManifoldPoint& q) const {
  if (kind_ == Kind::MetricBall) return target_.distance_to(q) < param_;
  target_.model().check_model(q);
  const double x = reduce_angle(q.coords[0] - x_ref_);
  const double y = q.coords[1];
  if (kind_ == Kind::CylinderFunnel) {
    const double ay = std::abs(y);
    const double inv = ay > 0 ? 1.0 / ay : kInfinity;
    const bool upper = (kPi - x < inv && inv < kPi) || (kPi + x < inv && inv < kPi);
    const bool low = x != 0 && ay * kPi <= 1.0;
    return upper || low;
  }
  const double a = (std::cosh(param_) - 1.0) / 2.0;
  const double ay = a * y;
  if (ay > kPi) return true;
  return (0 <= kPi + x && kPi + x < ay && ay <= kPi) || (0 < kPi - x && kPi - x < ay && ay <= kPi);
}

double NeighborhoodSpec::derived_eps() const {
  switch (kind_) {
    case Kind::MetricBall: return param_;
    case Kind::CylinderFunnel: return 1.0 / 50.0;
    case Kind::TrumpetFunnel: return param_;
  }
  return param_;
}

std::string NeighborhoodSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::MetricBall: os << "metric_ball(" << target_.describe() << "; eps=" << param_ << ")"; break;
    case Kind::CylinderFunnel: os << "cylinder_funnel(x_p=" << x_ref_ << ")"; break;
    case Kind::TrumpetFunnel: os << "trumpet_funnel(x_p=" << x_ref_ << "; delta=" << param_ << ")"; break;
  }
  return os.str();
}

json NeighborhoodSpec::to_json() const {
  switch (kind_) {
    case Kind::MetricBall: return json{{"type", "metric_ball"}, {"eps", param_}, {"target", target_.describe()}};
    case Kind::CylinderFunnel: return json{{"type", "cylinder_funnel"}, {"x_p", x_ref_}};
    case Kind::TrumpetFunnel:
      return json{{"type", "trumpet_funnel"}, {"x_p", x_ref_}, {"delta", param_},
                  {"alpha", (std::cosh(param_) - 1.0) / 2.0}};
  }
  return json();
}

// ---------------------------------------------------------------------------

std::vector<ManifoldPoint> cut_locus_candidates(const CutLocusSet& cut) {
  const Manifold& m = cut.model();
  std::vector<ManifoldPoint> out;
  for (const auto& c : cut.components()) {
    switch (c.shape) {
      case CutLocusSet::Shape::Point: out.push_back(c.anchor); break;
      case CutLocusSet::Shape::VerticalLine: {
        std::vector<double> ys;
        if (m.kind() == ModelKind::Cylinder) {
          ys.push_back(0.0);
          for (int k = -20; k <= 40; ++k) {
            ys.push_back(std::ldexp(1.0, k));
            ys.push_back(-std::ldexp(1.0, k));
          }
        } else if (m.kind() == ModelKind::Trumpet) {
          for (int k = -40; k <= 40; ++k) ys.push_back(std::ldexp(1.0, k));
        } else {
          for (int j = 0; j < 64; ++j) ys.push_back(-kPi + kTwoPi * j / 64);
        }
        for (double y : ys) out.push_back(m.point({c.position, y}));
        break;
      }
      case CutLocusSet::Shape::HorizontalLine:
        for (int j = 0; j < 64; ++j) out.push_back(m.point({-kPi + kTwoPi * j / 64, c.position}));
        break;
    }
  }
  return out;
}

bool verify_witness(const Manifold& m, const ManifoldPoint& p, double r, const NeighborhoodSpec& nbhd,
                    const ManifoldPoint& generator, const ManifoldPoint& witness) {
  if (!(m.distance(p, generator) < r)) return false;
  if (!(m.distance_to_cut(generator, witness) <= kCutTolerance)) return false;
  if (!(m.cut_locus_of_ball(p, r).distance_to(witness) <= kCutTolerance)) return false;
  return !nbhd.contains(witness);
}

namespace {

// Axis directions first (-e1 leading), then diagonals, in frame coefficients.
std::vector<Eigen::VectorXd> probe_directions(int d) {
  std::vector<Eigen::VectorXd> dirs;
  for (int j = 0; j < d; ++j) {
    for (double s : {-1.0, 1.0}) dirs.push_back(s * Eigen::VectorXd::Unit(d, j));
  }
  if (d == 2) {
    for (double a : {-1.0, 1.0}) {
      for (double b : {-1.0, 1.0}) {
        Eigen::VectorXd v(2);
        v << a, b;
        dirs.push_back(v / std::sqrt(2.0));
      }
    }
  }
  return dirs;
}

ProbeEntry probe_radius(const Manifold& m, const ManifoldPoint& p, const NeighborhoodSpec& nbhd, double r,
                        const ProbeOptions& o) {
  ProbeEntry e;
  e.r = r;
  const auto dirs = probe_directions(m.dim());
  auto try_point = [&](const ManifoldPoint& q) {
    ++e.ball_points;
    for (const auto& c : cut_locus_candidates(m.cut_locus(q))) {
      ++e.cut_points;
      if (nbhd.contains(c)) continue;
      if (verify_witness(m, p, r, nbhd, q, c)) {
        e.witness_found = true;
        e.witness = c;
        e.generator = q;
        return true;
      }
    }
    return false;
  };
  for (std::size_t k = 0; k < 2 * static_cast<std::size_t>(m.dim()); ++k) {
    if (try_point(m.exp_frame(p, 0.5 * r * dirs[k]))) return e;
  }
  for (const auto& d : dirs) {
    if (try_point(m.exp_frame(p, r * (1.0 - 1e-9) * d))) return e;
  }
  for (int i = 0; i < o.samples; ++i) {
    CounterRng rng(derive_seed(o.seed, "probe", static_cast<std::uint64_t>(i)));
    if (try_point(m.sample_ball(p, r, rng))) return e;
  }
  return e;
}

std::string window_of(const Manifold& m) {
  switch (m.kind()) {
    case ModelKind::Cylinder: return "cut lines searched at y in {0, +-2^k : -20 <= k <= 40}";
    case ModelKind::Trumpet: return "cut lines searched at y = 2^k, -40 <= k <= 40";
    case ModelKind::Torus: return "cut lines searched at 64 equispaced points";
    default: return "full cut locus";
  }
}

}  // namespace

StabilityProbeResult probe_topological_stability(const Manifold& m, const ManifoldPoint& p,
                                                 const NeighborhoodSpec& nbhd, std::vector<double> r_list,
                                                 const ProbeOptions& o) {
  m.validate(p);
  m.require_same(nbhd.target().model());
  if (r_list.empty()) throw DomainError("probe: empty radius list");
  std::sort(r_list.begin(), r_list.end(), std::greater<>());
  StabilityProbeResult res;
  res.model = m;
  res.p = p;
  res.neighborhood = nbhd.describe();
  res.params = json{{"r_list", r_list}, {"neighborhood", nbhd.to_json()}, {"samples_per_radius", o.samples},
                    {"seed", o.seed}};
  res.window = window_of(m);
  for (double r : r_list) {
    if (!(r > 0)) throw DomainError("probe: radii must be positive");
    ProbeEntry e = probe_radius(m, p, nbhd, r, o);
    res.samples += e.ball_points;
    res.r_used = r;
    const bool found = e.witness_found;
    if (found) {
      res.witness = e.witness;
      res.generator = e.generator;
    }
    res.entries.push_back(std::move(e));
    if (!found) {
      res.stable = true;
      res.witness.reset();
      res.generator.reset();
      break;
    }
  }
  return res;
}

StabilityProbeResult probe_metric_stability(const Manifold& m, const ManifoldPoint& p, double eps,
                                            std::vector<double> delta_list, const ProbeOptions& o) {
  if (!(eps > 0)) throw DomainError("probe_metric_stability: eps must be positive");
  StabilityProbeResult r =
      probe_topological_stability(m, p, NeighborhoodSpec::metric_ball(m.cut_locus(p), eps), std::move(delta_list), o);
  r.params["eps"] = eps;
  return r;
}

// ---------------------------------------------------------------------------

double distance_to_vertical_by_search(double x, double y, double c, double tol) {
  const Manifold t = Manifold::trumpet();
  const ManifoldPoint w = t.point({x, y});
  auto f = [&](double u) { return t.distance(w, t.point({c, std::exp(u)})); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(y) - 30.0, b = std::log(y) + 30.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(0.5 * (a + b))});
}

TrumpetWitness trumpet_witness(double y0, double r, double delta) {
  if (!(y0 > 0)) throw DomainError("trumpet_witness: y0 must be positive");
  if (!(r > 0 && r < std::asinh(kPi / y0))) {
    throw DomainError("trumpet_witness: r must lie in (0, asinh(pi / y0))");
  }
  if (!(delta >= 0)) throw DomainError("trumpet_witness: delta must be nonnegative");
  const Manifold t = Manifold::trumpet();
  const ManifoldPoint p = t.point({0.0, y0});
  const double s = y0 * std::sinh(r) / 2.0;
  // The ball point (-s, y0 cosh r) sits at the centre height of the
  // Euclidean disc, half its radius off-axis; its cut line is x = pi - s.
  const ManifoldPoint gen = t.point({-s, y0 * std::cosh(r)});

  // The distance asinh(s / y) to the line x = pi grows as y decreases.
  double y = y0;
  int halvings = 0;
  double dist = distance_to_vertical_by_search(kPi - s, y, kPi);
  while (!(dist > delta)) {
    y *= 0.5;
    ++halvings;
    if (halvings > 2000) throw VerificationError("trumpet_witness: no witness found");
    dist = distance_to_vertical_by_search(kPi - s, y, kPi);
  }
  const ManifoldPoint w = t.point({kPi - s, y});
  TrumpetWitness out{w, gen, dist, hyperbolic_distance_to_vertical(s, y), halvings, false};
  const double to_cut = t.cut_locus(p).distance_to(w);
  out.verified = t.distance(p, gen) < r && t.distance_to_cut(gen, w) <= kCutTolerance &&
                 t.cut_locus_of_ball(p, r).distance_to(w) <= kCutTolerance && to_cut > delta &&
                 std::abs(dist - out.closed_form) <= 1e-8 * std::max(1.0, dist);
  return out;
}

// ---------------------------------------------------------------------------

ImplicationReport stability_implication_check(const std::vector<ImplicationCase>& cases, const ProbeOptions& o) {
  ImplicationReport rep;
  for (const auto& c : cases) {
    rep.topological.push_back(probe_topological_stability(c.model, c.p, c.nbhd, c.r_list, o));
    const auto& deltas = c.delta_list.empty() ? c.r_list : c.delta_list;
    rep.metric.push_back(probe_metric_stability(c.model, c.p, c.nbhd.derived_eps(), deltas, o));
    const bool holds = !rep.topological.back().stable || rep.metric.back().stable;
    rep.implication_holds.push_back(holds);
    rep.all_hold = rep.all_hold && holds;
  }
  return rep;
}

namespace {

std::vector<ManifoldPoint> sample_set(const CutLocusSet& s, double y_lo, double y_hi, int n) {
  const Manifold& m = s.model();
  std::vector<ManifoldPoint> out;
  const bool log_y = m.kind() == ModelKind::Trumpet;
  const std::vector<double> us{-1.0, -0.5, 0.0, 0.5, 1.0};
  for (const auto& c : s.components()) {
    switch (c.shape) {
      case CutLocusSet::Shape::VerticalLine:
        for (int i = 0; i < n; ++i) {
          const double f = static_cast<double>(i) / (n - 1);
          const double y = log_y ? y_lo * std::pow(y_hi / y_lo, f) : y_lo + (y_hi - y_lo) * f;
          const double h = s.x_halfwidth_at(c, y);
          for (double u : us) out.push_back(m.point({c.position + u * h, y}));
        }
        break;
      case CutLocusSet::Shape::HorizontalLine:
        for (int i = 0; i < n; ++i) {
          const double x = -kPi + kTwoPi * i / n;
          const double h = std::min(kPi, c.halfwidth + s.metric_radius());
          for (double u : us) out.push_back(m.point({x, c.position + u * h}));
        }
        break;
      case CutLocusSet::Shape::Point: {
        out.push_back(c.anchor);
        const double rad = std::min(kPi, c.halfwidth + s.metric_radius());
        if (rad > 0) {
          for (int i = 0; i < n; ++i) {
            const double phi = kTwoPi * i / n;
            for (double u : {0.5, 1.0}) {
              Eigen::VectorXd v(m.dim());
              if (m.dim() == 1) v << (i % 2 ? 1.0 : -1.0) * u * rad;
              else v << u * rad * std::cos(phi), u * rad * std::sin(phi);
              out.push_back(m.exp_frame(c.anchor, v));
            }
          }
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace

double hausdorff_distance(const CutLocusSet& a, const CutLocusSet& b, double y_lo, double y_hi, int samples) {
  a.model().require_same(b.model());
  double h = 0;
  for (const auto& q : sample_set(a, y_lo, y_hi, samples)) h = std::max(h, b.distance_to(q));
  for (const auto& q : sample_set(b, y_lo, y_hi, samples)) h = std::max(h, a.distance_to(q));
  return h;
}

json probe_to_json(const StabilityProbeResult& r) {
  auto pt = [](const std::optional<ManifoldPoint>& p) -> json {
    if (!p) return nullptr;
    return std::vector<double>(p->coords.data(), p->coords.data() + p->coords.size());
  };
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"r", e.r},
                       {"witness_found", e.witness_found},
                       {"witness", pt(e.witness)},
                       {"generator", pt(e.generator)},
                       {"ball_points", e.ball_points},
                       {"cut_points", e.cut_points}});
  }
  return json{{"model", r.model.name()},
              {"p", pt(r.p)},
              {"params", r.params},
              {"stable", r.stable},
              {"witness_coords", pt(r.witness)},
              {"generator_coords", pt(r.generator)},
              {"r_used", r.r_used},
              {"samples", r.samples},
              {"window", r.window},
              {"entries", entries}};
}

}  // namespace rfm
