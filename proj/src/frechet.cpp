#include "rfm/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rfm {

namespace {

bool lex_less(const ManifoldPoint& a, const ManifoldPoint& b) {
  return std::lexicographical_compare(a.coords.data(), a.coords.data() + a.coords.size(), b.coords.data(),
                                      b.coords.data() + b.coords.size());
}

bool is_half_plane(const Manifold& m) {
  return m.kind() == ModelKind::Hyperbolic || m.kind() == ModelKind::Trumpet;
}

struct Candidate {
  ManifoldPoint point;
  double value;
  double gradient_norm;
  int iterations;
};

// Ties within the relative tolerance, merged by distance, lexicographically
// sorted.
FrechetResult assemble(const Manifold& m, std::vector<Candidate> cands, const FrechetOptions& o, int res,
                       int starts) {
  FrechetResult r;
  r.grid_resolution = res;
  r.starts = starts;
  if (cands.empty()) return r;
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value < b.value;
    return lex_less(a.point, b.point);
  });
  const double best = cands.front().value;
  const double cutoff = best * (1.0 + o.tie_rel) + 1e-12;
  std::vector<Candidate> kept;
  for (auto& c : cands) {
    if (c.value > cutoff) continue;
    bool dup = false;
    for (const auto& k : kept) {
      if (m.distance(k.point, c.point) < o.merge_distance) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) { return lex_less(a.point, b.point); });
  r.value = best;
  for (auto& k : kept) {
    r.minimizers.push_back(k.point);
    r.values.push_back(k.value);
    r.iterations = std::max(r.iterations, k.iterations);
    r.gradient_norm = std::max(r.gradient_norm, k.gradient_norm);
  }
  return r;
}

// Indices of grid points that are discrete local minima, best first.
std::vector<int> grid_minima(const SearchGrid& grid, const std::vector<double>& values, int max_count) {
  std::vector<int> minima;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    bool is_min = true;
    for (int nb : grid.neighbours[i]) {
      if (values[nb] < values[i]) {
        is_min = false;
        break;
      }
    }
    if (is_min) minima.push_back(static_cast<int>(i));
  }
  std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) { return values[a] < values[b]; });
  if (static_cast<int>(minima.size()) > max_count) minima.resize(max_count);
  return minima;
}

}  // namespace

// ---------------------------------------------------------------------------

bool SearchWindow::contains(const Manifold& m, const ManifoldPoint& p) const {
  if (lo.size() == p.coords.size()) {
    for (int i = 0; i < lo.size(); ++i) {
      if (p.coords[i] < lo[i] || p.coords[i] > hi[i]) return false;
    }
  }
  if (ball_center && !(m.distance(*ball_center, p) <= ball_radius)) return false;
  return true;
}

SearchWindow SearchWindow::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() != hi.size()) throw ConfigError("window: bound size mismatch");
  if (!((hi - lo).array() > 0).all()) throw ConfigError("window: empty box");
  SearchWindow w;
  w.lo = std::move(lo);
  w.hi = std::move(hi);
  return w;
}

SearchWindow SearchWindow::ball(const Manifold& m, const ManifoldPoint& c, double r) {
  m.validate(c);
  if (!(r > 0)) throw ConfigError("window: ball radius must be positive");
  SearchWindow w;
  w.ball_center = c;
  w.ball_radius = r;
  if (m.kind() == ModelKind::Sphere) return w;
  w.lo = c.coords.array() - r;
  w.hi = c.coords.array() + r;
  if (is_half_plane(m)) {
    const double y = c.coords[1];
    w.lo << c.coords[0] - y * std::sinh(r), y * std::exp(-r);
    w.hi << c.coords[0] + y * std::sinh(r), y * std::exp(r);
  }
  return w;
}

// ---------------------------------------------------------------------------

SearchGrid make_search_grid(const Manifold& m, int resolution, const SearchWindow* window) {
  if (resolution < 3) throw ConfigError("grid resolution must be at least 3");
  if (!m.is_compact() && (!window || window->lo.size() == 0)) {
    throw ConfigError(m.name() + ": a search window is required on a non-compact model");
  }
  SearchGrid grid;
  grid.resolution = resolution;
  const int dim = m.dim();

  // Axis values and periodicity per grid axis.
  std::vector<std::vector<double>> axes;
  std::vector<bool> periodic;
  auto linspace = [](double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
  };
  auto circle_axis = [&](int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = -kPi + kTwoPi * i / n;
    return v;
  };
  const bool has_box = window && window->lo.size() == (m.kind() == ModelKind::Sphere ? 3 : dim);
  auto angle_axis = [&](int k) {
    if (has_box && window->hi[k] - window->lo[k] < kTwoPi) {
      axes.push_back(linspace(window->lo[k], window->hi[k], resolution));
      periodic.push_back(false);
    } else {
      axes.push_back(circle_axis(resolution));
      periodic.push_back(true);
    }
  };
  auto line_axis = [&](int k) {
    axes.push_back(linspace(window->lo[k], window->hi[k], resolution));
    periodic.push_back(false);
  };

  switch (m.kind()) {
    case ModelKind::Circle: angle_axis(0); break;
    case ModelKind::Torus: angle_axis(0); angle_axis(1); break;
    case ModelKind::Cylinder:
    case ModelKind::Trumpet: angle_axis(0); line_axis(1); break;
    case ModelKind::Hyperbolic: line_axis(0); line_axis(1); break;
    case ModelKind::Euclidean: {
      const int res = std::max(3, std::min(resolution, static_cast<int>(std::pow(2e5, 1.0 / dim))));
      grid.resolution = res;
      for (int k = 0; k < dim; ++k) {
        axes.push_back(linspace(window->lo[k], window->hi[k], res));
        periodic.push_back(false);
      }
      break;
    }
    case ModelKind::Sphere:
      axes.push_back(linspace(0.0, kPi, resolution));  // polar angle
      periodic.push_back(false);
      axes.push_back(circle_axis(resolution));  // azimuth
      periodic.push_back(true);
      break;
  }

  const int naxes = static_cast<int>(axes.size());
  std::vector<int> sizes(naxes);
  int total = 1;
  for (int k = 0; k < naxes; ++k) {
    sizes[k] = static_cast<int>(axes[k].size());
    total *= sizes[k];
  }
  std::vector<int> keep_index(total, -1);
  std::vector<int> idx(naxes, 0);
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    for (int k = 0; k < naxes; ++k) {
      idx[k] = rem % sizes[k];
      rem /= sizes[k];
    }
    Eigen::VectorXd c;
    if (m.kind() == ModelKind::Sphere) {
      const double th = axes[0][idx[0]], ph = axes[1][idx[1]];
      c.resize(3);
      c << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
    } else {
      c.resize(naxes);
      for (int k = 0; k < naxes; ++k) c[k] = axes[k][idx[k]];
    }
    if (is_half_plane(m) && !(c[1] > 0)) continue;
    ManifoldPoint p = m.point(c);
    // Box bounds hold by construction; the ball is filtered here.
    if (window && window->ball_center && m.distance(*window->ball_center, p) > window->ball_radius) continue;
    keep_index[flat] = static_cast<int>(grid.points.size());
    grid.points.push_back(std::move(p));
  }
  grid.neighbours.resize(grid.points.size());
  for (int flat = 0; flat < total; ++flat) {
    const int self = keep_index[flat];
    if (self < 0) continue;
    int rem = flat;
    for (int k = 0; k < naxes; ++k) {
      idx[k] = rem % sizes[k];
      rem /= sizes[k];
    }
    int stride = 1;
    for (int k = 0; k < naxes; ++k) {
      for (int d : {-1, 1}) {
        int j = idx[k] + d;
        if (j < 0 || j >= sizes[k]) {
          if (!periodic[k]) continue;
          j = (j + sizes[k]) % sizes[k];
        }
        const int other = keep_index[flat + (j - idx[k]) * stride];
        if (other >= 0) grid.neighbours[self].push_back(other);
      }
      stride *= sizes[k];
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------

DescentResult riemannian_descent(const Manifold& m, const ManifoldPoint& start,
                                 const std::function<double(const ManifoldPoint&)>& f,
                                 const std::function<Eigen::VectorXd(const ManifoldPoint&)>& grad,
                                 double gradient_tol, int max_iterations, bool keep_trace,
                                 const SearchWindow* window) {
  ManifoldPoint q = start;
  double fq = f(q);
  Eigen::VectorXd g = grad(q);
  double gn = g.norm();
  DescentResult r{q, fq, gn, 0, {}};
  if (keep_trace) r.trace.push_back(fq);
  int it = 0;
  for (; it < max_iterations && gn >= gradient_tol; ++it) {
    double step = 0.5;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      ManifoldPoint cand = m.exp_frame(q, -step * g);
      if (window && !window->contains(m, cand)) continue;
      const double fc = f(cand);
      if (fc < fq && fc <= fq - 1e-4 * step * gn * gn) {
        q = std::move(cand);
        fq = fc;
        accepted = true;
        break;
      }
    }
    // No sufficient decrease even at tiny steps: the gradient is at the
    // roundoff level of the objective.
    if (!accepted) break;
    if (keep_trace) r.trace.push_back(fq);
    g = grad(q);
    gn = g.norm();
  }
  r.point = q;
  r.value = fq;
  r.gradient_norm = gn;
  r.iterations = it;
  return r;
}

double frechet_function(const ManifoldPoint& q, const MeasureSpec& spec) {
  const Manifold& m = spec.model();
  m.validate(q);
  return expectation(spec, [&](const ManifoldPoint& p) { return m.squared_distance(q, p); }, &q);
}

Eigen::VectorXd frechet_gradient(const ManifoldPoint& q, const MeasureSpec& spec) {
  const Manifold& m = spec.model();
  m.validate(q);
  return expectation(
      spec, [&](const ManifoldPoint& p) -> Eigen::VectorXd { return -2.0 * m.log_frame(q, p); }, m.dim(), &q);
}

FrechetResult frechet_mean_set(const MeasureSpec& spec, const FrechetOptions& o) {
  const Manifold& m = spec.model();
  const SearchWindow* win = o.window ? &*o.window : nullptr;
  const SearchGrid grid = make_search_grid(m, o.grid_resolution, win);
  if (grid.points.empty()) throw ConfigError("frechet_mean_set: the search window contains no grid point");
  std::vector<double> values(grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) values[i] = frechet_function(grid.points[i], spec);

  auto f = [&](const ManifoldPoint& q) { return frechet_function(q, spec); };
  auto g = [&](const ManifoldPoint& q) { return frechet_gradient(q, spec); };
  std::vector<Candidate> cands;
  const auto starts = grid_minima(grid, values, o.max_starts);
  for (int s : starts) {
    DescentResult d = riemannian_descent(m, grid.points[s], f, g, o.gradient_tol, o.max_iterations, false, win);
    cands.push_back({d.point, d.value, d.gradient_norm, d.iterations});
  }
  return assemble(m, std::move(cands), o, grid.resolution, static_cast<int>(starts.size()));
}

// ---------------------------------------------------------------------------

double sample_frechet_function(const ManifoldPoint& q, const SampleBatch& batch) {
  double s = 0;
  for (const auto& p : batch.points) s += batch.model.squared_distance(q, p);
  return s / static_cast<double>(batch.points.size());
}

Eigen::VectorXd sample_frechet_gradient(const ManifoldPoint& q, const SampleBatch& batch) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(batch.model.dim());
  for (const auto& p : batch.points) g -= 2.0 * batch.model.log_frame(q, p);
  return g / static_cast<double>(batch.points.size());
}

FrechetResult empirical_frechet_mean(const SampleBatch& batch, const std::optional<ManifoldPoint>& hint,
                                     const FrechetOptions& o) {
  const Manifold& m = batch.model;
  if (batch.points.empty()) throw DomainError("empirical_frechet_mean: empty batch");
  const SearchWindow* win = o.window ? &*o.window : nullptr;
  const std::size_t n = batch.points.size();

  std::vector<ManifoldPoint> starts;
  if (hint) {
    m.validate(*hint);
    starts.push_back(*hint);
  }
  int used_res = 0;
  if (m.kind() == ModelKind::Euclidean) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.dim());
    for (const auto& p : batch.points) mean += p.coords;
    starts.push_back(m.point(mean / static_cast<double>(n)));
  } else if (o.grid_resolution > 0 && (m.is_compact() || (win && win->lo.size() > 0))) {
    // Keep grid seeding within about 1e6 distance evaluations.
    const double budget = 1e6 / static_cast<double>(n);
    const int res = std::max(8, std::min(o.grid_resolution, static_cast<int>(std::pow(budget, 1.0 / m.dim()))));
    const SearchGrid grid = make_search_grid(m, res, win);
    used_res = grid.resolution;
    std::vector<double> values(grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i) values[i] = sample_frechet_function(grid.points[i], batch);
    for (int s : grid_minima(grid, values, o.max_starts)) starts.push_back(grid.points[s]);
  } else if (starts.empty() || o.grid_resolution > 0) {
    const std::size_t k = std::min<std::size_t>(n, 64);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < k; ++i) scored.emplace_back(sample_frechet_function(batch.points[i], batch), i);
    std::sort(scored.begin(), scored.end());
    for (std::size_t i = 0; i < std::min<std::size_t>(scored.size(), 4); ++i) {
      starts.push_back(batch.points[scored[i].second]);
    }
  }

  auto f = [&](const ManifoldPoint& q) { return sample_frechet_function(q, batch); };
  auto g = [&](const ManifoldPoint& q) { return sample_frechet_gradient(q, batch); };
  std::vector<Candidate> cands;
  std::vector<std::size_t> singular;
  for (const auto& s : starts) {
    DescentResult d = riemannian_descent(m, s, f, g, o.gradient_tol, o.max_iterations, false, win);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < n; ++i) {
      if (m.on_cut_locus(batch.points[i], d.point)) hits.push_back(i);
    }
    if (!hits.empty()) {
      if (singular.empty()) singular = hits;
      continue;
    }
    cands.push_back({d.point, d.value, d.gradient_norm, d.iterations});
  }
  if (cands.empty()) {
    throw SolverError("empirical_frechet_mean: every descent start ended on the cut locus of a sample point",
                      singular);
  }
  return assemble(m, std::move(cands), o, used_res, static_cast<int>(starts.size()));
}

// ---------------------------------------------------------------------------

std::vector<ConsistencyRow> consistency_curve(const MeasureSpec& spec, const ManifoldPoint& true_mean,
                                              const std::vector<std::size_t>& n_list, int reps,
                                              std::uint64_t seed, const FrechetOptions& options) {
  const Manifold& m = spec.model();
  m.validate(true_mean);
  if (reps < 1) throw DomainError("consistency_curve: reps must be positive");
  std::vector<ConsistencyRow> rows;
  for (std::size_t n : n_list) {
    if (n == 0) throw DomainError("consistency_curve: n must be positive");
    for (int rep = 0; rep < reps; ++rep) {
      const std::uint64_t s = derive_seed(derive_seed(seed, "consistency", n), "rep", static_cast<std::uint64_t>(rep));
      const SampleBatch batch = sample(spec, n, s);
      const FrechetResult r = empirical_frechet_mean(batch, true_mean, options);
      rows.push_back({n, rep, s, m.distance(r.minimizers.front(), true_mean), r.value, r.iterations});
    }
  }
  return rows;
}

std::vector<double> median_errors(const std::vector<ConsistencyRow>& rows, const std::vector<std::size_t>& n_list) {
  std::vector<double> out;
  for (std::size_t n : n_list) {
    std::vector<double> e;
    for (const auto& r : rows) {
      if (r.n == n) e.push_back(r.error_chart);
    }
    if (e.empty()) {
      out.push_back(std::nan(""));
      continue;
    }
    std::sort(e.begin(), e.end());
    const std::size_t k = e.size();
    out.push_back(k % 2 ? e[k / 2] : 0.5 * (e[k / 2 - 1] + e[k / 2]));
  }
  return out;
}

}  // namespace rfm
