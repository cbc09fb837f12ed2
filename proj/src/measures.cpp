#include "rfm/measures.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>

#include "rfm/detail/json_fields.hpp"

namespace rfm {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// nu: normalization, mean and height quantiles.

constexpr int kNuKnots = 10000;
constexpr double kNuHeightMax = 1e3;

class NuCurve {
 public:
  static const NuCurve& get() {
    static const NuCurve curve;
    return curve;
  }

  NuConstants constants;

  double quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw DomainError("nu quantile: u must be in [0, 1)");
    if (u >= cdf_.back()) {
      // Beyond y = 1e3 the two branches carry gamma t^5 / 2 dt to relative
      // accuracy 1e-5, so nu({y > 1/t}) = gamma t^6 / 12.
      const double t = std::pow(12.0 * (1.0 - u) / constants.gamma, 1.0 / 6.0);
      return 1.0 / std::min(t, 1.0 / kNuHeightMax);
    }
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    // Solve the monotone cubic Hermite piece H(s) = u on [s_k, s_k+1].
    const double h = step_;
    const double g0 = cdf_[k], g1 = cdf_[k + 1];
    const double m0 = slope_[k] * h, m1 = slope_[k + 1] * h;
    auto hermite = [&](double x) {
      const double x2 = x * x, x3 = x2 * x;
      return (2 * x3 - 3 * x2 + 1) * g0 + (x3 - 2 * x2 + x) * m0 + (-2 * x3 + 3 * x2) * g1 + (x3 - x2) * m1;
    };
    auto hermite_dx = [&](double x) {
      const double x2 = x * x;
      return (6 * x2 - 6 * x) * g0 + (3 * x2 - 4 * x + 1) * m0 + (-6 * x2 + 6 * x) * g1 + (3 * x2 - 2 * x) * m1;
    };
    double lo = 0, hi = 1;
    double x = (g1 > g0) ? (u - g0) / (g1 - g0) : 0.5;
    for (int iter = 0; iter < 60; ++iter) {
      const double f = hermite(x) - u;
      if (f > 0) hi = x; else lo = x;
      const double d = hermite_dx(x);
      double nx = d > 0 ? x - f / d : 0.5 * (lo + hi);
      if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
      if (std::abs(nx - x) < 1e-15) {
        x = nx;
        break;
      }
      x = nx;
    }
    return std::exp(k * h + x * h);
  }

  double tail_mass(double threshold) const {
    if (threshold <= 1.0) return 1.0;
    return constants.gamma * integrate([](double t) { return 2.0 * nu_branch_density_t(t); }, 0.0,
                                       1.0 / threshold);
  }

 private:
  NuCurve() {
    const QuadratureTolerance tol{1e-16, 1e-13, 4000};
    auto both = [](double t) { return 2.0 * nu_branch_density_t(t); };
    const double integral = integrate(both, 0.0, 1.0, tol);
    const double gamma = 1.0 / integral;
    const double y_nu = gamma * integrate([&](double t) { return both(t) / t; }, 0.0, 1.0, tol);
    constants = NuConstants{gamma, y_nu, integral};

    // CDF of s = log y on uniform knots, with exact slopes dG/ds = gamma 2 rho(t) t.
    step_ = std::log(kNuHeightMax) / (kNuKnots - 1);
    cdf_.resize(kNuKnots);
    slope_.resize(kNuKnots);
    cdf_[0] = 0;
    for (int k = 0; k < kNuKnots; ++k) {
      const double t = std::exp(-k * step_);
      slope_[k] = gamma * both(t) * t;
      if (k > 0) {
        const double t_prev = std::exp(-(k - 1) * step_);
        cdf_[k] = cdf_[k - 1] + gamma * integrate(both, t, t_prev, {1e-18, 1e-13, 200});
      }
    }
    // Fritsch-Carlson limiter keeps each piece monotone.
    for (int k = 0; k + 1 < kNuKnots; ++k) {
      const double delta = (cdf_[k + 1] - cdf_[k]) / step_;
      if (delta <= 0) {
        slope_[k] = slope_[k + 1] = 0;
        continue;
      }
      const double a = slope_[k] / delta, b = slope_[k + 1] / delta;
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double tau = 3.0 / std::sqrt(s);
        slope_[k] = tau * a * delta;
        slope_[k + 1] = tau * b * delta;
      }
    }
  }

  double step_ = 0;
  std::vector<double> cdf_, slope_;
};

// ---------------------------------------------------------------------------

double sum_weights(const std::vector<double>& w) { return std::accumulate(w.begin(), w.end(), 0.0); }

void check_weights(const std::vector<double>& w, std::size_t count, const char* what) {
  if (w.size() != count || count == 0) throw DomainError(std::string(what) + ": weight count mismatch");
  for (double x : w) {
    if (!(x >= 0) || !std::isfinite(x)) throw DomainError(std::string(what) + ": negative weight");
  }
  if (std::abs(sum_weights(w) - 1.0) > 1e-12) throw DomainError(std::string(what) + ": weights must sum to 1");
}

std::size_t categorical(const std::vector<double>& w, double u) {
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  // Rounding left u above the last partial sum; pick the last positive weight.
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] > 0) return i;
  }
  return w.size() - 1;
}

// Polar product rule for a 2-D geodesic ball: Gauss-Legendre in the radius
// against the area element, trapezoid in the angle.
WeightedPoints ball_rule_2d(const Manifold& m, const ManifoldPoint& c, double radius, int nr, int nphi) {
  const GaussRule& gl = gauss_legendre(nr);
  const double k = m.curvature();
  WeightedPoints out;
  out.points.reserve(static_cast<std::size_t>(nr) * nphi);
  double total = 0;
  for (int i = 0; i < nr; ++i) {
    const double rho = 0.5 * radius * (gl.nodes[i] + 1.0);
    const double jac = k > 0 ? std::sin(rho) : (k < 0 ? std::sinh(rho) : rho);
    const double w = 0.5 * radius * gl.weights[i] * jac / nphi;
    for (int j = 0; j < nphi; ++j) {
      const double phi = kTwoPi * (j + 0.5) / nphi;
      Eigen::VectorXd v(2);
      v << rho * std::cos(phi), rho * std::sin(phi);
      out.points.push_back(m.exp_frame(c, v));
      out.weights.push_back(w);
      total += w;
    }
  }
  for (double& w : out.weights) w /= total;
  return out;
}

WeightedPoints box_rule(const UniformOnBox& b, int n) {
  const GaussRule& gl = gauss_legendre(n);
  const int m = static_cast<int>(b.lo.size());
  Manifold model = Manifold::euclidean(m);
  WeightedPoints out;
  std::vector<int> idx(m, 0);
  while (true) {
    Eigen::VectorXd x(m);
    double w = 1;
    for (int d = 0; d < m; ++d) {
      x[d] = b.lo[d] + 0.5 * (b.hi[d] - b.lo[d]) * (gl.nodes[idx[d]] + 1.0);
      w *= 0.5 * gl.weights[idx[d]];
    }
    out.points.push_back(model.point(x));
    out.weights.push_back(w);
    int d = 0;
    while (d < m && ++idx[d] == n) idx[d++] = 0;
    if (d == m) break;
  }
  return out;
}

// Parametrized one-dimensional continuous part: s in [a, b] with density
// `density(s)` (integrating to the part's mass) and points `at(s)`.
struct Segment {
  double a, b;
  std::function<double(double)> density;
  std::function<ManifoldPoint(double)> at;
  std::vector<double> kinks;
};

// Segments for the one-dimensional continuous variants. Kinks come from the
// reference point's cut relation.
std::vector<Segment> segments_of(const MeasureSpec& spec, const ManifoldPoint* ref) {
  const Manifold& m = spec.model();
  std::vector<Segment> out;
  if (const auto* arc = std::get_if<WrappedUniformArc>(&spec.variant())) {
    const double c = arc->center, h = arc->halfwidth;
    Segment s{c - h, c + h, [h](double) { return 0.5 / h; },
              [m](double th) { return m.point({th}); }, {}};
    if (ref) {
      const double star = c + wrap_difference(ref->coords[0] + kPi - c);
      for (double k : {star - kTwoPi, star, star + kTwoPi}) {
        if (k > s.a && k < s.b) s.kinks.push_back(k);
      }
    }
    out.push_back(std::move(s));
  } else if (const auto* ball = std::get_if<UniformOnBall>(&spec.variant())) {
    const double r = ball->radius;
    const ManifoldPoint c = ball->center;
    Segment s{-r, r, [r](double) { return 0.5 / r; },
              [m, c](double v) { return m.exp_frame(c, Eigen::VectorXd::Constant(1, v)); }, {}};
    if (ref && m.kind() == ModelKind::Circle) {
      const double star = wrap_difference(ref->coords[0] + kPi - c.coords[0]);
      for (double k : {star - kTwoPi, star, star + kTwoPi}) {
        if (k > s.a && k < s.b) s.kinks.push_back(k);
      }
    }
    out.push_back(std::move(s));
  } else if (const auto* nu = std::get_if<CurveDensityNu>(&spec.variant())) {
    const double gamma = nu->gamma;
    for (int branch : {+1, -1}) {
      Segment s{0.0, 1.0, [gamma](double t) { return gamma * nu_branch_density_t(t); },
                [branch](double t) { return nu_point(1.0 / t, branch); }, {}};
      if (ref) {
        // Cut(p) for p on branch +1 at height 1/t is the line x = -t; on
        // branch -1 it is x = t.
        const double x = ref->coords[0];
        const double k = branch > 0 ? -x : x;
        if (k > 0 && k < 1) s.kinks.push_back(k);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

bool is_segment_variant(const MeasureSpec& spec) {
  const auto& v = spec.variant();
  if (std::holds_alternative<WrappedUniformArc>(v) || std::holds_alternative<CurveDensityNu>(v)) return true;
  return std::holds_alternative<UniformOnBall>(v) && spec.model().dim() == 1;
}

template <class V>
V zero_like(int size) {
  if constexpr (std::is_same_v<V, double>) {
    (void)size;
    return 0.0;
  } else {
    return Eigen::VectorXd::Zero(size);
  }
}

template <class V>
V expect_impl(const MeasureSpec& spec, const std::function<V(const ManifoldPoint&)>& g, int size,
              const ManifoldPoint* ref, const QuadratureTolerance& tol);

template <class V>
V expect_segments(const MeasureSpec& spec, const std::function<V(const ManifoldPoint&)>& g, int size,
                  const ManifoldPoint* ref, const QuadratureTolerance& tol) {
  V total = zero_like<V>(size);
  for (const Segment& s : segments_of(spec, ref)) {
    std::vector<double> br{s.a};
    std::vector<double> k = s.kinks;
    std::sort(k.begin(), k.end());
    br.insert(br.end(), k.begin(), k.end());
    br.push_back(s.b);
    auto f = [&](double x) -> V { return V(s.density(x) * g(s.at(x))); };
    total += integrate(f, br, tol);
  }
  return total;
}

template <class V>
V expect_points(const WeightedPoints& wp, const std::function<V(const ManifoldPoint&)>& g, int size) {
  V total = zero_like<V>(size);
  for (std::size_t i = 0; i < wp.points.size(); ++i) {
    if (wp.weights[i] != 0) total += wp.weights[i] * g(wp.points[i]);
  }
  return total;
}

template <class V>
V expect_impl(const MeasureSpec& spec, const std::function<V(const ManifoldPoint&)>& g, int size,
              const ManifoldPoint* ref, const QuadratureTolerance& tol) {
  const auto& v = spec.variant();
  if (const auto* pm = std::get_if<PointMass>(&v)) return V(g(pm->atom));
  if (const auto* da = std::get_if<DiscreteAtoms>(&v)) {
    return expect_points<V>(WeightedPoints{da->points, da->weights}, g, size);
  }
  if (const auto* mix = std::get_if<Mixture>(&v)) {
    V total = zero_like<V>(size);
    for (std::size_t i = 0; i < mix->components.size(); ++i) {
      if (mix->weights[i] == 0) continue;
      total += mix->weights[i] * expect_impl<V>(mix->components[i], g, size, ref, tol);
    }
    return total;
  }
  if (is_segment_variant(spec)) return expect_segments<V>(spec, g, size, ref, tol);
  if (const WeightedPoints* rule = spec.product_rule()) return expect_points<V>(*rule, g, size);
  return expect_points<V>(discretize(spec, 1.0), g, size);
}

double scan_segment(const Segment& s, const std::function<bool(const ManifoldPoint&)>& region) {
  constexpr int kCells = 4096;
  // Open-ended parametrizations (nu at t = 0 and t = 1) are probed just inside.
  const double lo = s.a + (s.b - s.a) * 1e-12, hi = s.b - (s.b - s.a) * 1e-12;
  std::vector<double> grid(kCells + 1);
  for (int i = 0; i <= kCells; ++i) grid[i] = s.a + (s.b - s.a) * i / kCells;
  grid[0] = lo;
  grid[kCells] = hi;
  std::vector<char> inside(kCells + 1);
  for (int i = 0; i <= kCells; ++i) inside[i] = region(s.at(grid[i])) ? 1 : 0;
  std::vector<double> cuts{s.a};
  for (int i = 0; i < kCells; ++i) {
    if (inside[i] == inside[i + 1]) continue;
    double a = grid[i], b = grid[i + 1];
    for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      ((region(s.at(mid)) ? 1 : 0) == inside[i] ? a : b) = mid;
    }
    cuts.push_back(0.5 * (a + b));
  }
  cuts.push_back(s.b);
  double mass = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b > a)) continue;
    double probe = 0.5 * (a + b);
    probe = std::clamp(probe, lo, hi);
    if (!region(s.at(probe))) continue;
    mass += integrate(s.density, a, b, {1e-17, 1e-13, 4000});
  }
  return mass;
}

}  // namespace

const NuConstants& nu_constants() { return NuCurve::get().constants; }

ManifoldPoint nu_point(double y, int branch) {
  if (!(y > 1.0)) throw DomainError("nu: curve height must exceed 1");
  Eigen::VectorXd c(2);
  c << (branch > 0 ? 1.0 : -1.0) * (kPi - 1.0 / y), y;
  return Manifold::cylinder().point(std::move(c));
}

double nu_tail_mass(double threshold) { return NuCurve::get().tail_mass(threshold); }

double nu_height_quantile(double u) { return NuCurve::get().quantile(u); }

// ---------------------------------------------------------------------------

MeasureSpec MeasureSpec::point_mass(const Manifold& model, const ManifoldPoint& p) {
  model.validate(p);
  return MeasureSpec(model, PointMass{p});
}

MeasureSpec MeasureSpec::discrete(const Manifold& model, std::vector<ManifoldPoint> points,
                                  std::vector<double> weights) {
  for (const auto& p : points) model.validate(p);
  check_weights(weights, points.size(), "discrete_atoms");
  return MeasureSpec(model, DiscreteAtoms{std::move(points), std::move(weights)});
}

MeasureSpec MeasureSpec::uniform_ball(const Manifold& model, const ManifoldPoint& center, double radius) {
  model.validate(center);
  if (!(radius > 0)) throw DomainError("uniform_ball: radius must be positive");
  if (!(radius < model.injectivity_radius(center))) {
    throw DomainError("uniform_ball: radius must be below the injectivity radius at the center");
  }
  MeasureSpec spec(model, UniformOnBall{center, radius});
  if (model.dim() == 2) spec.rule_ = std::make_shared<const WeightedPoints>(discretize(spec, 1.0));
  return spec;
}

MeasureSpec MeasureSpec::uniform_box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw DomainError("uniform_box: bound size mismatch");
  if (!((hi - lo).array() > 0).all()) throw DomainError("uniform_box: empty box");
  const int m = static_cast<int>(lo.size());
  MeasureSpec spec(Manifold::euclidean(m), UniformOnBox{std::move(lo), std::move(hi)});
  if (m <= 3) spec.rule_ = std::make_shared<const WeightedPoints>(discretize(spec, 1.0));
  return spec;
}

MeasureSpec MeasureSpec::wrapped_arc(double center, double halfwidth) {
  if (!(halfwidth > 0 && halfwidth <= kPi)) throw DomainError("wrapped_arc: halfwidth must be in (0, pi]");
  if (!std::isfinite(center)) throw DomainError("wrapped_arc: non-finite center");
  return MeasureSpec(Manifold::circle(), WrappedUniformArc{reduce_angle(center), halfwidth});
}

MeasureSpec MeasureSpec::nu() { return MeasureSpec(Manifold::cylinder(), CurveDensityNu{nu_constants().gamma}); }

MeasureSpec MeasureSpec::mixture(std::vector<MeasureSpec> components, std::vector<double> weights) {
  check_weights(weights, components.size(), "mixture");
  const Manifold model = components.front().model();
  for (const auto& c : components) model.require_same(c.model());
  return MeasureSpec(model, Mixture{std::move(components), std::move(weights)});
}

MeasureSpec MeasureSpec::mu_alpha(double alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw DomainError("mu_alpha: alpha must be in [0, 1]");
  const Manifold c = Manifold::cylinder();
  return mixture({nu(), point_mass(c, c.point({0.0, nu_constants().y_nu}))}, {alpha, 1.0 - alpha});
}

std::string MeasureSpec::type_name() const {
  static const char* names[] = {"point_mass",          "discrete_atoms",   "uniform_ball", "uniform_box",
                                "wrapped_uniform_arc", "curve_density_nu", "mixture"};
  return names[variant_.index()];
}

// ---------------------------------------------------------------------------

double expectation(const MeasureSpec& spec, const std::function<double(const ManifoldPoint&)>& g,
                   const ManifoldPoint* kink_reference, const QuadratureTolerance& tol) {
  return expect_impl<double>(spec, g, 1, kink_reference, tol);
}

Eigen::VectorXd expectation(const MeasureSpec& spec,
                            const std::function<Eigen::VectorXd(const ManifoldPoint&)>& g, int size,
                            const ManifoldPoint* kink_reference, const QuadratureTolerance& tol) {
  return expect_impl<Eigen::VectorXd>(spec, g, size, kink_reference, tol);
}

WeightedPoints discretize(const MeasureSpec& spec, double level) {
  const Manifold& m = spec.model();
  const auto& v = spec.variant();
  auto count = [level](int base) { return std::max(2, static_cast<int>(std::lround(base * level))); };
  if (const auto* pm = std::get_if<PointMass>(&v)) return WeightedPoints{{pm->atom}, {1.0}};
  if (const auto* da = std::get_if<DiscreteAtoms>(&v)) return WeightedPoints{da->points, da->weights};
  if (const auto* mix = std::get_if<Mixture>(&v)) {
    WeightedPoints out;
    for (std::size_t i = 0; i < mix->components.size(); ++i) {
      WeightedPoints part = discretize(mix->components[i], level);
      for (std::size_t j = 0; j < part.points.size(); ++j) {
        out.points.push_back(std::move(part.points[j]));
        out.weights.push_back(mix->weights[i] * part.weights[j]);
      }
    }
    return out;
  }
  if (const auto* box = std::get_if<UniformOnBox>(&v)) {
    if (box->lo.size() > 3) throw ConfigError("uniform_box: quadrature supports dimension <= 3");
    return box_rule(*box, count(16));
  }
  if (const auto* ball = std::get_if<UniformOnBall>(&v)) {
    if (m.dim() == 2) return ball_rule_2d(m, ball->center, ball->radius, count(48), count(96));
    if (m.dim() > 2) throw ConfigError("uniform_ball: quadrature supports dimension <= 2");
  }
  // One-dimensional parts: composite Gauss-Legendre, 8 nodes per panel.
  WeightedPoints out;
  const GaussRule& gl = gauss_legendre(8);
  const int panels = count(64);
  for (const Segment& s : segments_of(spec, nullptr)) {
    const double h = (s.b - s.a) / panels;
    for (int p = 0; p < panels; ++p) {
      for (int i = 0; i < 8; ++i) {
        const double x = s.a + h * (p + 0.5 * (gl.nodes[i] + 1.0));
        out.points.push_back(s.at(x));
        out.weights.push_back(0.5 * h * gl.weights[i] * s.density(x));
      }
    }
  }
  return out;
}

double measure_of_region(const MeasureSpec& spec, const std::function<bool(const ManifoldPoint&)>& region) {
  const auto& v = spec.variant();
  if (const auto* pm = std::get_if<PointMass>(&v)) return region(pm->atom) ? 1.0 : 0.0;
  if (const auto* da = std::get_if<DiscreteAtoms>(&v)) {
    double mass = 0;
    for (std::size_t i = 0; i < da->points.size(); ++i) {
      if (region(da->points[i])) mass += da->weights[i];
    }
    return mass;
  }
  if (const auto* mix = std::get_if<Mixture>(&v)) {
    double mass = 0;
    for (std::size_t i = 0; i < mix->components.size(); ++i) {
      if (mix->weights[i] != 0) mass += mix->weights[i] * measure_of_region(mix->components[i], region);
    }
    return mass;
  }
  if (is_segment_variant(spec)) {
    double mass = 0;
    for (const Segment& s : segments_of(spec, nullptr)) mass += scan_segment(s, region);
    return std::min(1.0, mass);
  }
  const WeightedPoints wp = discretize(spec, 1.0);
  double mass = 0;
  for (std::size_t i = 0; i < wp.points.size(); ++i) {
    if (region(wp.points[i])) mass += wp.weights[i];
  }
  return mass;
}

// ---------------------------------------------------------------------------

ManifoldPoint draw(const MeasureSpec& spec, CounterRng& rng) {
  const Manifold& m = spec.model();
  return std::visit(
      [&](const auto& x) -> ManifoldPoint {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return x.atom;
        } else if constexpr (std::is_same_v<T, DiscreteAtoms>) {
          return x.points[categorical(x.weights, rng.uniform())];
        } else if constexpr (std::is_same_v<T, UniformOnBall>) {
          return m.sample_ball(x.center, x.radius, rng);
        } else if constexpr (std::is_same_v<T, UniformOnBox>) {
          Eigen::VectorXd c(x.lo.size());
          for (int i = 0; i < c.size(); ++i) c[i] = rng.uniform(x.lo[i], x.hi[i]);
          return m.point(std::move(c));
        } else if constexpr (std::is_same_v<T, WrappedUniformArc>) {
          return m.point({x.center + x.halfwidth * (2.0 * rng.uniform() - 1.0)});
        } else if constexpr (std::is_same_v<T, CurveDensityNu>) {
          const double y = nu_height_quantile(rng.uniform());
          const int branch = rng.uniform() < 0.5 ? 1 : -1;
          return nu_point(y, branch);
        } else {
          const std::size_t k = categorical(x.weights, rng.uniform());
          return draw(x.components[k], rng);
        }
      },
      spec.variant());
}

SampleBatch sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed) {
  SampleBatch batch{spec.model(), {}, seed, n};
  batch.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, "sample", i));
    batch.points.push_back(draw(spec, rng));
  }
  return batch;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using detail::field;
using detail::require_keys;
using detail::vec_from_json;
using detail::vec_to_json;

}  // namespace

json model_to_json(const Manifold& m) {
  json j{{"kind", m.name()}};
  if (m.kind() == ModelKind::Euclidean) j["dim"] = m.dim();
  return j;
}

Manifold model_from_json(const json& j) {
  if (j.is_string()) return Manifold::from_name(j.get<std::string>());
  require_keys(j, {"kind", "dim"}, "model");
  const auto kind = field<std::string>(j, "kind", "model");
  const int dim = j.contains("dim") ? field<int>(j, "dim", "model") : 0;
  try {
    return Manifold::from_name(kind, dim);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

json point_to_json(const ManifoldPoint& p) { return vec_to_json(p.coords); }

ManifoldPoint point_from_json(const Manifold& m, const json& j) {
  if (j.is_number()) return m.point({j.get<double>()});
  try {
    return m.point(vec_from_json(j, "point"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("point: ") + e.what());
  }
}

json measure_to_json(const MeasureSpec& spec) {
  const Manifold& m = spec.model();
  json j{{"type", spec.type_name()}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          j["model"] = model_to_json(m);
          j["atom"] = point_to_json(x.atom);
        } else if constexpr (std::is_same_v<T, DiscreteAtoms>) {
          j["model"] = model_to_json(m);
          json pts = json::array();
          for (const auto& p : x.points) pts.push_back(point_to_json(p));
          j["points"] = pts;
          j["weights"] = x.weights;
        } else if constexpr (std::is_same_v<T, UniformOnBall>) {
          j["model"] = model_to_json(m);
          j["center"] = point_to_json(x.center);
          j["radius"] = x.radius;
        } else if constexpr (std::is_same_v<T, UniformOnBox>) {
          j["lo"] = vec_to_json(x.lo);
          j["hi"] = vec_to_json(x.hi);
        } else if constexpr (std::is_same_v<T, WrappedUniformArc>) {
          j["center"] = x.center;
          j["halfwidth"] = x.halfwidth;
        } else if constexpr (std::is_same_v<T, CurveDensityNu>) {
          j["gamma"] = x.gamma;
        } else {
          json comps = json::array();
          for (const auto& c : x.components) comps.push_back(measure_to_json(c));
          j["components"] = comps;
          j["weights"] = x.weights;
        }
      },
      spec.variant());
  return j;
}

MeasureSpec measure_from_json(const json& j) {
  const std::string where = "measure";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const auto type = field<std::string>(j, "type", where);
  const std::string w = where + "(" + type + ")";
  try {
    if (type == "point_mass") {
      require_keys(j, {"type", "model", "atom"}, w);
      const Manifold m = model_from_json(j.at("model"));
      return MeasureSpec::point_mass(m, point_from_json(m, j.at("atom")));
    }
    if (type == "discrete_atoms") {
      require_keys(j, {"type", "model", "points", "weights"}, w);
      const Manifold m = model_from_json(j.at("model"));
      std::vector<ManifoldPoint> pts;
      for (const auto& p : j.at("points")) pts.push_back(point_from_json(m, p));
      return MeasureSpec::discrete(m, std::move(pts), field<std::vector<double>>(j, "weights", w));
    }
    if (type == "uniform_ball") {
      require_keys(j, {"type", "model", "center", "radius"}, w);
      const Manifold m = model_from_json(j.at("model"));
      return MeasureSpec::uniform_ball(m, point_from_json(m, j.at("center")), field<double>(j, "radius", w));
    }
    if (type == "uniform_box") {
      require_keys(j, {"type", "lo", "hi"}, w);
      return MeasureSpec::uniform_box(vec_from_json(j.at("lo"), w + ".lo"), vec_from_json(j.at("hi"), w + ".hi"));
    }
    if (type == "wrapped_uniform_arc") {
      require_keys(j, {"type", "center", "halfwidth"}, w);
      return MeasureSpec::wrapped_arc(field<double>(j, "center", w), field<double>(j, "halfwidth", w));
    }
    if (type == "curve_density_nu") {
      require_keys(j, {"type", "gamma"}, w);
      MeasureSpec spec = MeasureSpec::nu();
      if (j.contains("gamma")) {
        const double g = field<double>(j, "gamma", w);
        if (std::abs(g - nu_constants().gamma) > 1e-10 * nu_constants().gamma) {
          throw ConfigError(w + ".gamma: does not match the computed normalization");
        }
      }
      return spec;
    }
    if (type == "mu_alpha") {
      require_keys(j, {"type", "alpha"}, w);
      return MeasureSpec::mu_alpha(field<double>(j, "alpha", w));
    }
    if (type == "mixture") {
      require_keys(j, {"type", "components", "weights"}, w);
      std::vector<MeasureSpec> comps;
      for (const auto& c : j.at("components")) comps.push_back(measure_from_json(c));
      if (comps.empty()) throw ConfigError(w + ": no components");
      return MeasureSpec::mixture(std::move(comps), field<std::vector<double>>(j, "weights", w));
    }
  } catch (const DomainError& e) {
    throw ConfigError(w + ": " + e.what());
  } catch (const ModelMismatchError& e) {
    throw ConfigError(w + ": " + e.what());
  }
  throw ConfigError(where + ": unknown type '" + type + "'");
}

}  // namespace rfm
