#include "rfm/counterexample.hpp"

#include <algorithm>
#include <cmath>

#include "rfm/detail/json_fields.hpp"

namespace rfm {

using nlohmann::json;

namespace {

const Manifold& cyl() {
  static const Manifold m = Manifold::cylinder();
  return m;
}

const MeasureSpec& nu_spec() {
  static const MeasureSpec s = MeasureSpec::nu();
  return s;
}

double sq(double v) { return v * v; }

// Integrands in t = 1/y summed over both branches, with gamma = 1. With
// z = b (pi - t) + i / t and w = x + i y,
//   |z - w|^2 t^5 / (4 (t^2 (pi - t)^2 + 1))
// is rewritten as t^3 (t^2 dx^2 + (1 - t y)^2) / (4 (s^2 + 1)).
double euclid_integrand(double t, double x, double y) {
  const double s = t * (kPi - t);
  const double den = 4.0 * (s * s + 1.0);
  double acc = 0;
  for (int b : {1, -1}) acc += t * t * sq(b * (kPi - t) - x) + sq(1.0 - t * y);
  return t * t * t * acc / den;
}

double cylinder_integrand(double t, double x, double y) {
  const double s = t * (kPi - t);
  const double den = 4.0 * (s * s + 1.0);
  double acc = 0;
  for (int b : {1, -1}) acc += t * t * sq(wrap_difference(b * (kPi - t) - x)) + sq(1.0 - t * y);
  return t * t * t * acc / den;
}

// Euclidean integrand at w minus the one at i y_nu, expanded so that no
// cancellation of O(1) terms occurs.
double euclid_difference_integrand(double t, double x, double y, double y_nu) {
  const double s = t * (kPi - t);
  const double den = 4.0 * (s * s + 1.0);
  double acc = 0;
  for (int b : {1, -1}) {
    const double a = b * (kPi - t);
    acc += t * t * (x * x - 2.0 * a * x) + t * t * (y * y - y_nu * y_nu) - 2.0 * t * (y - y_nu);
  }
  return t * t * t * acc / den;
}

template <class F>
double gamma_integral(F&& f, double a, double b, const QuadratureTolerance& tol) {
  if (!(b > a)) return 0.0;
  return nu_constants().gamma * integrate(std::forward<F>(f), a, b, tol);
}

ManifoldPoint project_to_disc(const ManifoldPoint& c, double r, ManifoldPoint p) {
  Eigen::Vector2d d(p.coords[0] - c.coords[0], p.coords[1] - c.coords[1]);
  const double n = d.norm();
  if (n > r) d *= r / n;
  return cyl().point({c.coords[0] + d[0], c.coords[1] + d[1]});
}

}  // namespace

void CounterexampleConfig::validate() const {
  if (!(r > 0 && r < kPi)) throw ConfigError("counterexample.r: must lie in (0, pi)");
  if (alpha && !(*alpha >= 0 && *alpha < 1)) throw ConfigError("counterexample.alpha: must lie in [0, 1)");
  if (a_r_grid < 3 || mean_grid < 3 || location_grid < 3) throw ConfigError("counterexample: grids need >= 3 nodes");
  if (!(location_exclusion >= 0 && location_exclusion < r)) {
    throw ConfigError("counterexample.location_exclusion: must lie in [0, r)");
  }
  if (!(mean_tolerance > 0)) throw ConfigError("counterexample.mean_tolerance: must be positive");
  if (!(window_lo[0] < window_hi[0] && window_lo[1] < window_hi[1])) {
    throw ConfigError("counterexample.window: lo must be below hi");
  }
  for (double e : tail_eps) {
    if (!(e > 0 && e < 1)) throw ConfigError("counterexample.tail_eps: entries must lie in (0, 1)");
  }
  for (double e : a2b_radii) {
    if (!(e > 0 && e < kPi)) throw ConfigError("counterexample.a2b_radii: entries must lie in (0, pi)");
  }
  if (condition_c_samples < 0 || chain_points < 0) throw ConfigError("counterexample: sample counts must be >= 0");
}

ManifoldPoint nu_mean_point() { return cyl().point({0.0, nu_constants().y_nu}); }

double f_one(const ManifoldPoint& w) { return frechet_function(w, nu_spec()); }

ArEstimate compute_a_r(double r, int grid) {
  if (!(r > 0 && r < kPi)) throw DomainError("compute_a_r: r must lie in (0, pi)");
  if (grid < 3) throw DomainError("compute_a_r: grid needs at least 3 nodes");
  const ManifoldPoint c = nu_mean_point();
  const double h = 2.0 * r / (grid - 1);
  const double reach = r + h / std::sqrt(2.0);
  double best = -1, best_all = -1;
  ManifoldPoint arg = c;
  int evals = 0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double dx = -r + i * h, dy = -r + j * h;
      const double d = std::hypot(dx, dy);
      if (d > reach) continue;
      const ManifoldPoint w = cyl().point({dx, c.coords[1] + dy});
      const double f = f_one(w);
      ++evals;
      best_all = std::max(best_all, f);
      if (d <= r && f > best) {
        best = f;
        arg = w;
      }
    }
  }
  // Projected ascent from the best node.
  double step = 0.1;
  for (int it = 0; it < 500 && step > 1e-12; ++it) {
    const Eigen::VectorXd g = frechet_gradient(arg, nu_spec());
    ++evals;
    if (g.norm() < 1e-14) break;
    ManifoldPoint cand = project_to_disc(c, r, cyl().point({arg.coords[0] + step * g[0], arg.coords[1] + step * g[1]}));
    const double f = f_one(cand);
    ++evals;
    if (f > best + 1e-15) {
      best = f;
      arg = cand;
    } else {
      step *= 0.5;
    }
  }
  const double upper = sq(std::sqrt(std::max(best_all, best)) + h / std::sqrt(2.0));
  return ArEstimate{best, upper, upper - best, arg, grid, evals};
}

double tail_constant(double r) {
  const auto& nc = nu_constants();
  return 2.0 * nc.gamma * (1.0 + (nc.y_nu * nc.y_nu + r * r) / sq(kPi - 1.0));
}

double alpha_threshold(double r, double a_r) {
  if (!(a_r >= 0)) throw DomainError("alpha_threshold: A_r must be nonnegative");
  return std::min(r * r / (r * r + a_r), 1.0 / (1.0 + tail_constant(r)));
}

double alpha_threshold(double r) { return alpha_threshold(r, compute_a_r(r).upper); }

// ---------------------------------------------------------------------------

MeanLocationReport verify_mean_location(const CounterexampleConfig& cfg, double alpha) {
  cfg.validate();
  const ManifoldPoint c = nu_mean_point();
  const MeasureSpec mu = MeasureSpec::mu_alpha(alpha);
  MeanLocationReport rep{alpha, c, {}, 0, false, 0, kInfinity, 0, false, c, false, false};

  FrechetOptions local;
  local.grid_resolution = cfg.mean_grid;
  local.window = SearchWindow::ball(cyl(), c, cfg.r);
  const FrechetResult res = frechet_mean_set(mu, local);
  rep.minimizers = res.minimizers;
  rep.mean = res.minimizers.front();
  rep.distance_to_iy_nu = cyl().distance(rep.mean, c);
  rep.matches_iy_nu = res.minimizers.size() == 1 && rep.distance_to_iy_nu < cfg.mean_tolerance;

  rep.f_at_iy_nu = frechet_function(c, mu);
  const int g = cfg.location_grid;
  const double h = 2.0 * cfg.r / (g - 1);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double dx = -cfg.r + i * h, dy = -cfg.r + j * h;
      const double d = std::hypot(dx, dy);
      if (d >= cfg.r || d < cfg.location_exclusion) continue;
      const double gap = frechet_function(cyl().point({dx, c.coords[1] + dy}), mu) - rep.f_at_iy_nu;
      rep.min_gap = std::min(rep.min_gap, gap);
      ++rep.grid_points;
    }
  }
  rep.strict_on_grid = rep.min_gap > 0;

  FrechetOptions global;
  global.grid_resolution = cfg.mean_grid;
  global.window = SearchWindow::box(cfg.window_lo, cfg.window_hi);
  const FrechetResult all = frechet_mean_set(mu, global);
  rep.global_minimizer = all.minimizers.front();
  rep.global_in_ball = std::all_of(all.minimizers.begin(), all.minimizers.end(),
                                   [&](const ManifoldPoint& p) { return cyl().distance(p, c) < cfg.r; });
  rep.passed = rep.matches_iy_nu && rep.strict_on_grid && rep.global_in_ball;
  return rep;
}

// ---------------------------------------------------------------------------

double tail_functional(const ManifoldPoint& w, double eps, const QuadratureTolerance& tol) {
  cyl().check_model(w);
  const double x = w.coords[0], y = w.coords[1];
  return gamma_integral([&](double t) { return euclid_integrand(t, x, y); }, 0.0, eps, tol);
}

TailBoundReport verify_tail_bound(const ManifoldPoint& w, const std::vector<double>& eps_list,
                                  const QuadratureTolerance& tol) {
  cyl().check_model(w);
  const double w2 = w.coords.squaredNorm();
  TailBoundReport rep{w, {}, 0, false, true};
  for (double e : eps_list) {
    if (!(e > 0 && e < 1)) throw DomainError("verify_tail_bound: eps must lie in (0, 1)");
    TailRow row{e, tail_functional(w, e, tol), 2.0 * nu_constants().gamma * (1.0 + w2 / sq(kPi - 1.0)) * std::pow(e, 4)};
    row.ratio = row.integral / row.bound;
    row.holds = row.integral <= row.bound;
    rep.passed = rep.passed && row.holds;
    rep.rows.push_back(row);
  }
  rep.slope = std::log(tail_functional(w, 0.05, tol) / tail_functional(w, 0.005, tol)) / std::log(10.0);
  rep.slope_ok = std::abs(rep.slope - 4.0) <= 0.1;
  rep.passed = rep.passed && rep.slope_ok;
  return rep;
}

// ---------------------------------------------------------------------------

bool in_condition_c_region(const ManifoldPoint& q) {
  cyl().check_model(q);
  const double gap = kPi - std::abs(reduce_angle(q.coords[0]));
  const double y = q.coords[1];
  if (y > 1.0) return gap < std::min(1.0 / (2.0 * y), 1.0);
  return gap < 1.0;
}

ConditionCReport verify_condition_C(const CounterexampleConfig& cfg, double alpha) {
  cfg.validate();
  ConditionCReport rep;
  rep.w_description = "{pi - |x| < min(1/(2y), 1), y > 1} U {pi - |x| < 1, y <= 1}";
  rep.mass = measure_of_region(MeasureSpec::mu_alpha(alpha), in_condition_c_region);
  rep.samples = cfg.condition_c_samples;
  rep.samples_inside = 0;
  for (long i = 0; i < cfg.condition_c_samples; ++i) {
    CounterRng rng(derive_seed(cfg.seed, "condition-c", static_cast<std::uint64_t>(i)));
    if (in_condition_c_region(draw(nu_spec(), rng))) ++rep.samples_inside;
  }
  rep.passed = rep.mass <= 1e-12 && rep.samples_inside == 0;
  return rep;
}

// ---------------------------------------------------------------------------

A2bFailureReport verify_a2b_failure(const CounterexampleConfig& cfg, double alpha) {
  cfg.validate();
  const MeasureSpec mu = MeasureSpec::mu_alpha(alpha);
  const ManifoldPoint c = nu_mean_point();
  A2bFailureReport rep{{}, true};
  std::vector<double> radii = cfg.a2b_radii;
  std::sort(radii.begin(), radii.end());
  double prev = 0;
  for (double r : radii) {
    A2bRow row{r, check_a2b(mu, c, r).witness_mass, alpha * nu_tail_mass(1.0 / r), {}, {}};
    for (double f : {1.5, 3.0, 10.0}) {
      const ManifoldPoint p = nu_point(f * std::max(1.0, 1.0 / r), 1);
      row.generators.push_back(p);
      row.cut_line_x.push_back(reduce_angle(p.coords[0] + kPi));
    }
    const bool agrees = std::abs(row.mass - row.expected) <= 1e-8 * row.expected + 1e-15;
    if (!(row.mass > prev) || !agrees) rep.passed = false;
    prev = row.mass;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------

ChainLinks chain_links(const ManifoldPoint& w, double alpha, double r, const QuadratureTolerance& tol) {
  cyl().check_model(w);
  const double x = w.coords[0], y = w.coords[1];
  const double y_nu = nu_constants().y_nu;
  const double eps = std::abs(x);
  const double a = alpha, k = tail_constant(r);
  auto euc = [&](double t) { return euclid_integrand(t, x, y); };
  auto cy = [&](double t) { return cylinder_integrand(t, x, y); };
  const double euc_head = gamma_integral(euc, eps, 1.0, tol);
  const double euc_tail = gamma_integral(euc, 0.0, eps, tol);
  const double cyl_head = gamma_integral(cy, eps, 1.0, tol);
  const double cyl_tail = gamma_integral(cy, 0.0, eps, tol);
  const double euc_c = gamma_integral([&](double t) { return euclid_integrand(t, 0.0, y_nu); }, 0.0, 1.0, tol);
  const double d0 = x * x + sq(y - y_nu);
  ChainLinks l;
  l.eps = eps;
  l.cyl_head = cyl_head;
  l.euc_head = euc_head;
  l.l0 = (1 - a) * d0 + a * (cyl_head + cyl_tail);
  l.l1 = (1 - a) * d0 + a * euc_head;
  l.l2 = (1 - a) * eps * eps + a * (euc_head + euc_tail) - a * k * std::pow(eps, 4);
  l.l3 = a * euc_c + (1 - a) * (eps * eps - std::pow(eps, 4));
  l.l4 = frechet_function(nu_mean_point(), MeasureSpec::mu_alpha(alpha));
  l.f_alpha = frechet_function(w, MeasureSpec::mu_alpha(alpha));
  return l;
}

ChainReport verify_contradiction_chain(const CounterexampleConfig& cfg, double alpha) {
  cfg.validate();
  const ManifoldPoint c = nu_mean_point();
  const double y_nu = c.coords[1];
  const double a = alpha, k = tail_constant(cfg.r);
  const auto& tol = cfg.tolerance;
  ChainReport rep{cfg.chain_points, {kInfinity, kInfinity, kInfinity, kInfinity}, 0, 0, true};
  for (int i = 0; i < cfg.chain_points; ++i) {
    CounterRng rng(derive_seed(cfg.seed, "chain", static_cast<std::uint64_t>(i)));
    const double rad = cfg.r * std::sqrt(rng.uniform());
    const double phi = kTwoPi * rng.uniform();
    const double x = rad * std::cos(phi), y = y_nu + rad * std::sin(phi);
    const ManifoldPoint w = cyl().point({x, y});
    const ChainLinks l = chain_links(w, alpha, cfg.r, tol);
    const double eps = l.eps;
    // Margins are assembled from difference integrands so that they stay
    // resolvable when eps is tiny.
    const double head_diff = gamma_integral(
        [&](double t) { return cylinder_integrand(t, x, y) - euclid_integrand(t, x, y); }, eps, 1.0, tol);
    const double cyl_tail = gamma_integral([&](double t) { return cylinder_integrand(t, x, y); }, 0.0, eps, tol);
    const double euc_tail = gamma_integral([&](double t) { return euclid_integrand(t, x, y); }, 0.0, eps, tol);
    const double shift = gamma_integral(
        [&](double t) { return euclid_difference_integrand(t, x, y, y_nu); }, 0.0, 1.0, tol);
    const double e2 = eps * eps, e4 = e2 * e2;
    const double m[4] = {
        a * (head_diff + cyl_tail),
        (1 - a) * sq(y - y_nu) + a * (k * e4 - euc_tail),
        a * shift - a * k * e4 + (1 - a) * e4,
        (1 - a) * (e2 - e4),
    };
    for (int j = 0; j < 4; ++j) rep.min_margin[j] = std::min(rep.min_margin[j], m[j]);
    rep.max_head_mismatch = std::max(rep.max_head_mismatch, std::abs(l.cyl_head - l.euc_head));
    rep.max_f_mismatch = std::max(rep.max_f_mismatch, std::abs(l.l0 - l.f_alpha));
  }
  rep.passed = rep.min_margin[0] >= 0 && rep.min_margin[1] >= 0 && rep.min_margin[2] > 0 && rep.min_margin[3] > 0 &&
               rep.max_head_mismatch <= 1e-12 && rep.max_f_mismatch <= 1e-10;
  if (cfg.chain_points == 0) rep.passed = true;
  return rep;
}

// ---------------------------------------------------------------------------

CounterexampleReport run_counterexample(const CounterexampleConfig& cfg) {
  cfg.validate();
  CounterexampleReport rep;
  const auto& nc = nu_constants();
  rep.gamma = nc.gamma;
  rep.y_nu = nc.y_nu;
  rep.normalization =
      nc.gamma * integrate([](double t) { return 2.0 * nu_branch_density_t(t); }, 0.0, 1.0, cfg.tolerance);
  rep.normalization_ok = std::abs(rep.normalization - 1.0) <= 1e-10;
  rep.a_r = compute_a_r(cfg.r, cfg.a_r_grid);
  rep.threshold = alpha_threshold(cfg.r, rep.a_r.upper);
  rep.alpha = cfg.alpha.value_or(rep.threshold / 2.0);
  if (!(rep.alpha < rep.threshold)) {
    throw ConfigError("counterexample.alpha: must be below the threshold " + std::to_string(rep.threshold));
  }
  rep.mean = verify_mean_location(cfg, rep.alpha);

  const ManifoldPoint c = nu_mean_point();
  rep.tails.push_back(verify_tail_bound(c, cfg.tail_eps, cfg.tolerance));
  for (int j = 0; j < 4; ++j) {
    const double phi = kPi / 2 * j;
    const double s = cfg.r * (1.0 - 1e-9);
    rep.tails.push_back(verify_tail_bound(
        cyl().point({s * std::cos(phi), c.coords[1] + s * std::sin(phi)}), cfg.tail_eps, cfg.tolerance));
  }
  rep.condition_c = verify_condition_C(cfg, rep.alpha);
  rep.a2b = verify_a2b_failure(cfg, rep.alpha);
  rep.chain = verify_contradiction_chain(cfg, rep.alpha);
  rep.passed = rep.normalization_ok && rep.mean.passed &&
               std::all_of(rep.tails.begin(), rep.tails.end(), [](const auto& t) { return t.passed; }) &&
               rep.condition_c.passed && rep.a2b.passed && rep.chain.passed;
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

json counterexample_config_to_json(const CounterexampleConfig& c) {
  json j{{"r", c.r},
         {"tolerance", {{"abs", c.tolerance.abs}, {"rel", c.tolerance.rel}, {"max_intervals", c.tolerance.max_intervals}}},
         {"a_r_grid", c.a_r_grid},
         {"mean_grid", c.mean_grid},
         {"location_grid", c.location_grid},
         {"location_exclusion", c.location_exclusion},
         {"mean_tolerance", c.mean_tolerance},
         {"window_lo", detail::vec_to_json(c.window_lo)},
         {"window_hi", detail::vec_to_json(c.window_hi)},
         {"tail_eps", c.tail_eps},
         {"a2b_radii", c.a2b_radii},
         {"condition_c_samples", c.condition_c_samples},
         {"chain_points", c.chain_points},
         {"seed", c.seed}};
  j["alpha"] = c.alpha ? json(*c.alpha) : json(nullptr);
  return j;
}

CounterexampleConfig counterexample_config_from_json(const json& j) {
  using namespace detail;
  const std::string w = "counterexample";
  require_keys(j,
               {"r", "alpha", "tolerance", "a_r_grid", "mean_grid", "location_grid", "location_exclusion",
                "mean_tolerance", "window_lo", "window_hi", "tail_eps", "a2b_radii", "condition_c_samples",
                "chain_points", "seed"},
               w);
  CounterexampleConfig c;
  c.r = field_or(j, "r", c.r, w);
  if (j.contains("alpha") && !j.at("alpha").is_null()) c.alpha = field<double>(j, "alpha", w);
  if (j.contains("tolerance")) {
    const json& t = j.at("tolerance");
    require_keys(t, {"abs", "rel", "max_intervals"}, w + ".tolerance");
    c.tolerance.abs = field_or(t, "abs", c.tolerance.abs, w + ".tolerance");
    c.tolerance.rel = field_or(t, "rel", c.tolerance.rel, w + ".tolerance");
    c.tolerance.max_intervals = field_or(t, "max_intervals", c.tolerance.max_intervals, w + ".tolerance");
  }
  c.a_r_grid = field_or(j, "a_r_grid", c.a_r_grid, w);
  c.mean_grid = field_or(j, "mean_grid", c.mean_grid, w);
  c.location_grid = field_or(j, "location_grid", c.location_grid, w);
  c.location_exclusion = field_or(j, "location_exclusion", c.location_exclusion, w);
  c.mean_tolerance = field_or(j, "mean_tolerance", c.mean_tolerance, w);
  for (const char* key : {"window_lo", "window_hi"}) {
    if (!j.contains(key)) continue;
    const Eigen::VectorXd v = vec_from_json(j.at(key), w + "." + key);
    if (v.size() != 2) throw ConfigError(w + "." + key + ": expected two numbers");
    (std::string(key) == "window_lo" ? c.window_lo : c.window_hi) = v;
  }
  c.tail_eps = field_or(j, "tail_eps", c.tail_eps, w);
  c.a2b_radii = field_or(j, "a2b_radii", c.a2b_radii, w);
  c.condition_c_samples = field_or(j, "condition_c_samples", c.condition_c_samples, w);
  c.chain_points = field_or(j, "chain_points", c.chain_points, w);
  c.seed = field_or(j, "seed", c.seed, w);
  c.validate();
  return c;
}

json counterexample_to_json(const CounterexampleReport& r, const CounterexampleConfig& cfg) {
  auto pt = [](const ManifoldPoint& p) { return point_to_json(p); };
  json tails = json::array();
  for (const auto& t : r.tails) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      rows.push_back({{"eps", row.eps}, {"integral", row.integral}, {"bound", row.bound}, {"ratio", row.ratio},
                      {"holds", row.holds}});
    }
    tails.push_back({{"w", pt(t.w)}, {"rows", rows}, {"slope", t.slope}, {"slope_ok", t.slope_ok}, {"passed", t.passed}});
  }
  json a2b = json::array();
  for (const auto& row : r.a2b.rows) {
    json gens = json::array();
    for (std::size_t i = 0; i < row.generators.size(); ++i) {
      gens.push_back({{"p", pt(row.generators[i])}, {"cut_line_x", row.cut_line_x[i]}});
    }
    a2b.push_back({{"r", row.r}, {"mass", row.mass}, {"expected", row.expected}, {"generators", gens}});
  }
  json mins = json::array();
  for (const auto& p : r.mean.minimizers) mins.push_back(pt(p));
  return json{
      {"config", counterexample_config_to_json(cfg)},
      {"gamma", r.gamma},
      {"y_nu", r.y_nu},
      {"normalization", {{"value", r.normalization}, {"tolerance", 1e-10}, {"passed", r.normalization_ok}}},
      {"a_r",
       {{"lower", r.a_r.lower},
        {"upper", r.a_r.upper},
        {"gap", r.a_r.gap},
        {"argmax", pt(r.a_r.argmax)},
        {"grid", r.a_r.grid},
        {"evaluations", r.a_r.evaluations}}},
      {"threshold", r.threshold},
      {"tail_constant", tail_constant(cfg.r)},
      {"alpha", r.alpha},
      {"mean_location",
       {{"mean", pt(r.mean.mean)},
        {"minimizers", mins},
        {"distance_to_iy_nu", r.mean.distance_to_iy_nu},
        {"tolerance", cfg.mean_tolerance},
        {"matches_iy_nu", r.mean.matches_iy_nu},
        {"f_at_iy_nu", r.mean.f_at_iy_nu},
        {"min_grid_gap", r.mean.min_gap},
        {"grid_points", r.mean.grid_points},
        {"strict_on_grid", r.mean.strict_on_grid},
        {"global_minimizer", pt(r.mean.global_minimizer)},
        {"global_in_ball", r.mean.global_in_ball},
        {"passed", r.mean.passed}}},
      {"tail_bound", tails},
      {"condition_c",
       {{"W", r.condition_c.w_description},
        {"mass", r.condition_c.mass},
        {"tolerance", 1e-12},
        {"samples", r.condition_c.samples},
        {"samples_inside", r.condition_c.samples_inside},
        {"passed", r.condition_c.passed}}},
      {"a2b_failure", {{"rows", a2b}, {"passed", r.a2b.passed}}},
      {"contradiction_chain",
       {{"points", r.chain.points},
        {"min_margins", std::vector<double>(r.chain.min_margin, r.chain.min_margin + 4)},
        {"max_head_mismatch", r.chain.max_head_mismatch},
        {"max_f_mismatch", r.chain.max_f_mismatch},
        {"passed", r.chain.passed}}},
      {"passed", r.passed}};
}

}  // namespace rfm
