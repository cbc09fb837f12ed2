#include "rfm/clt.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace rfm {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

bool is_flat(const Manifold& m) { return m.curvature() == 0; }

}  // namespace

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& a, double max_condition) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(a));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.cwiseAbs().maxCoeff();
  if (!(lo > 0) || hi / lo > max_condition) {
    throw SingularHessianError("matrix is singular or too badly conditioned to invert (condition number " +
                                   std::to_string(lo > 0 ? hi / lo : kInfinity) + ")",
                               ev);
  }
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

CltMatrices clt_matrices(const MeasureSpec& spec, const ManifoldPoint& q0) {
  const Manifold& m = spec.model();
  m.validate(q0);
  const int d = m.dim();

  const double cut_mass = measure_of_region(spec, [&](const ManifoldPoint& p) { return m.on_cut_locus(q0, p); });
  if (cut_mass > 0) {
    throw CutLocusError("clt_matrices: the measure charges Cut(q0) with mass " + std::to_string(cut_mass),
                        q0.coords);
  }

  // One pass for grad, grad grad^T and Hess.
  const int size = d + 2 * d * d;
  const Eigen::VectorXd e = expectation(
      spec,
      [&](const ManifoldPoint& p) -> Eigen::VectorXd {
        Eigen::VectorXd out(size);
        const Eigen::VectorXd g = -2.0 * m.log_frame(q0, p);
        const Eigen::MatrixXd gg = g * g.transpose();
        const Eigen::MatrixXd h = m.hess_sq_dist(q0, p);
        out.head(d) = g;
        out.segment(d, d * d) = Eigen::Map<const Eigen::VectorXd>(gg.data(), d * d);
        out.tail(d * d) = Eigen::Map<const Eigen::VectorXd>(h.data(), d * d);
        return out;
      },
      size, &q0);

  CltMatrices r;
  r.mean_gradient = e.head(d);
  if (r.mean_gradient.norm() > kMeanGradientTol) {
    throw DomainError("clt_matrices: q0 is not a Frechet mean (gradient norm " +
                      std::to_string(r.mean_gradient.norm()) + ")");
  }
  const Eigen::MatrixXd egg = Eigen::Map<const Eigen::MatrixXd>(e.data() + d, d, d);
  r.lambda = symmetrize(Eigen::Map<const Eigen::MatrixXd>(e.data() + d + d * d, d, d));
  r.c = symmetrize(egg - r.mean_gradient * r.mean_gradient.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.lambda);
  const Eigen::VectorXd ev = es.eigenvalues();
  r.condition_number_lambda = ev.minCoeff() > 0 ? ev.cwiseAbs().maxCoeff() / ev.minCoeff() : kInfinity;
  const Eigen::MatrixXd inv = symmetric_inverse(r.lambda);
  r.sandwich = symmetrize(inv * r.c * inv);
  return r;
}

// ---------------------------------------------------------------------------

double ks_statistic(std::vector<double> x, double mean, double sd) {
  if (x.empty()) return 0;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  if (!(sd > 0)) {
    // Degenerate reference: the statistic is 0 iff every value is the mean.
    for (double v : x) {
      if (v != mean) return 1.0;
    }
    return 0.0;
  }
  const boost::math::normal_distribution<double> nd(mean, sd);
  double dmax = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = boost::math::cdf(nd, x[i]);
    dmax = std::max({dmax, (i + 1) / n - f, f - i / n});
  }
  return dmax;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

NormalityStats normality_tests(const std::vector<Eigen::VectorXd>& devs, const Eigen::MatrixXd& sandwich) {
  NormalityStats s;
  const std::size_t n = devs.size();
  if (n < 2) return s;
  const int d = static_cast<int>(devs.front().size());
  constexpr double kAlpha = 1e-3;
  s.ks_critical = ks_critical_value(n, kAlpha);
  s.z_critical = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - kAlpha / 2.0);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& v : devs) mean += v;
  mean /= static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& v : devs) cov += (v - mean) * (v - mean).transpose();
  cov /= static_cast<double>(n);

  s.ks_pass = true;
  for (int j = 0; j < d; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = devs[i][j];
    s.ks_theory.push_back(ks_statistic(col, 0.0, std::sqrt(std::max(0.0, sandwich(j, j)))));
    s.ks_fitted.push_back(ks_statistic(col, mean[j], std::sqrt(cov(j, j) * n / (n - 1.0))));
    if (!(s.ks_theory.back() < s.ks_critical)) s.ks_pass = false;
  }

  // Mardia's multivariate skewness and kurtosis on whitened deviations.
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || !(cov.diagonal().minCoeff() > 0)) {
    s.mardia_pass = false;
    return s;
  }
  Eigen::MatrixXd z(d, n);
  for (std::size_t i = 0; i < n; ++i) z.col(i) = llt.matrixL().solve(devs[i] - mean);
  double b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dii = z.col(i).squaredNorm();
    b2 += dii * dii;
    b1 += dii * dii * dii;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = z.col(i).dot(z.col(j));
      b1 += 2.0 * dij * dij * dij;
    }
  }
  const double nn = static_cast<double>(n);
  b1 /= nn * nn;
  b2 /= nn;
  s.mardia_skewness = b1;
  s.mardia_kurtosis = b2;
  const double dof = d * (d + 1.0) * (d + 2.0) / 6.0;
  s.mardia_skew_pvalue = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), nn * b1 / 6.0));
  s.mardia_kurtosis_z = (b2 - d * (d + 2.0)) / std::sqrt(8.0 * d * (d + 2.0) / nn);
  s.mardia_pass = s.mardia_skew_pvalue > kAlpha && std::abs(s.mardia_kurtosis_z) < s.z_critical;
  return s;
}

// ---------------------------------------------------------------------------

CltReport run_clt_experiment(const MeasureSpec& spec, const ManifoldPoint& q0, const CltOptions& o) {
  const Manifold& m = spec.model();
  if (o.n == 0 || o.reps < 2) throw DomainError("run_clt_experiment: need n >= 1 and reps >= 2");
  CltReport rep;
  rep.matrices = clt_matrices(spec, q0);
  rep.n = o.n;
  rep.reps = o.reps;
  rep.seed = o.seed;

  const double inj = m.injectivity_radius(q0);
  const double radius = o.chart_radius ? *o.chart_radius
                                       : (std::isfinite(inj) ? 0.9 * inj : std::numeric_limits<double>::max());
  const NormalChart chart(m, q0, radius);
  FrechetOptions fo;
  fo.grid_resolution = 0;
  if (std::isfinite(inj)) fo.window = SearchWindow{{}, {}, q0, radius};
  const double root_n = std::sqrt(static_cast<double>(o.n));

  rep.trials.resize(o.reps);
  auto run_trial = [&](int i) {
    TrialRecord& t = rep.trials[i];
    t.trial = i;
    t.seed = derive_seed(o.seed, "clt-trial", static_cast<std::uint64_t>(i));
    t.ok = false;
    t.iterations = 0;
    try {
      const SampleBatch batch = sample(spec, o.n, t.seed);
      const FrechetResult r = empirical_frechet_mean(batch, q0, fo);
      t.iterations = r.iterations;
      t.deviation = root_n * log_map(chart, r.minimizers.front()).coords;
      t.ok = true;
    } catch (const Error& e) {
      t.error = e.what();
      t.deviation = Eigen::VectorXd::Constant(m.dim(), std::nan(""));
    }
  };
  const int workers = std::max(1, std::min(o.parallelism, o.reps));
  if (workers == 1) {
    for (int i = 0; i < o.reps; ++i) run_trial(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < o.reps; i += workers) run_trial(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<Eigen::VectorXd> devs;
  for (const auto& t : rep.trials) {
    if (t.ok) devs.push_back(t.deviation);
  }
  rep.successes = static_cast<int>(devs.size());
  rep.failures = o.reps - rep.successes;
  if (rep.failures > o.max_failure_rate * o.reps) {
    throw VerificationError("run_clt_experiment: " + std::to_string(rep.failures) + " of " +
                            std::to_string(o.reps) + " trials failed (first: " +
                            std::find_if(rep.trials.begin(), rep.trials.end(), [](const TrialRecord& t) {
                              return !t.ok;
                            })->error + ")");
  }
  const int d = m.dim();
  rep.empirical_mean = Eigen::VectorXd::Zero(d);
  for (const auto& v : devs) rep.empirical_mean += v;
  rep.empirical_mean /= static_cast<double>(devs.size());
  rep.empirical_cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& v : devs) rep.empirical_cov += (v - rep.empirical_mean) * (v - rep.empirical_mean).transpose();
  rep.empirical_cov /= static_cast<double>(devs.size() - 1);
  const double ref = rep.matrices.sandwich.norm();
  const double diff = (rep.empirical_cov - rep.matrices.sandwich).norm();
  rep.frobenius_rel_err = ref > 0 ? diff / ref : diff;
  rep.normality = normality_tests(devs, rep.matrices.sandwich);
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

// Stencil offsets for the central second differences used by chart_hessian.
std::vector<Eigen::VectorXd> stencil(int d, double h) {
  std::vector<Eigen::VectorXd> s;
  s.push_back(Eigen::VectorXd::Zero(d));
  for (int j = 0; j < d; ++j) {
    for (double sg : {1.0, -1.0}) s.push_back(sg * h * Eigen::VectorXd::Unit(d, j));
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      for (double a : {1.0, -1.0}) {
        for (double b : {1.0, -1.0}) s.push_back(h * (a * Eigen::VectorXd::Unit(d, j) + b * Eigen::VectorXd::Unit(d, k)));
      }
    }
  }
  return s;
}

Eigen::MatrixXd stencil_hessian(const std::vector<double>& f, int d, double h) {
  Eigen::MatrixXd hm(d, d);
  for (int j = 0; j < d; ++j) hm(j, j) = (f[1 + 2 * j] - 2.0 * f[0] + f[2 + 2 * j]) / (h * h);
  int idx = 1 + 2 * d;
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const double v = (f[idx] - f[idx + 1] - f[idx + 2] + f[idx + 3]) / (4.0 * h * h);
      hm(j, k) = hm(k, j) = v;
      idx += 4;
    }
  }
  return hm;
}

constexpr double kChartStep = 1e-4;

}  // namespace

Eigen::MatrixXd chart_hessian(const Manifold& m, const ManifoldPoint& q0, const Eigen::VectorXd& w,
                              const ManifoldPoint& p) {
  const int d = m.dim();
  const ManifoldPoint x = m.exp_frame(q0, w);
  if (m.on_cut_locus(p, x)) {
    throw CutLocusError("chart_hessian: chart point lies on Cut(p)", x.coords);
  }
  if (is_flat(m)) return 2.0 * Eigen::MatrixXd::Identity(d, d);
  std::vector<double> f;
  for (const auto& s : stencil(d, kChartStep)) f.push_back(m.squared_distance(m.exp_frame(q0, w + s), p));
  return stencil_hessian(f, d, kChartStep);
}

std::vector<A5Row> a5_modulus(const MeasureSpec& spec, const ManifoldPoint& q0, const std::vector<double>& eps_list,
                              int net_per_dim) {
  const Manifold& m = spec.model();
  m.validate(q0);
  const int d = m.dim();
  if (net_per_dim < 2) throw DomainError("a5_modulus: net needs at least 2 points per dimension");
  const bool ball2d = std::holds_alternative<UniformOnBall>(spec.variant()) && d == 2;
  const WeightedPoints wp = discretize(spec, ball2d ? 1.0 / 3.0 : 1.0);
  const auto offsets = stencil(d, kChartStep);

  std::vector<A5Row> rows;
  for (double eps : eps_list) {
    if (!(eps > 0)) throw DomainError("a5_modulus: eps must be positive");
    // Cell-centred cube grid, kept where |w| < eps.
    std::vector<Eigen::VectorXd> net;
    std::vector<int> idx(d, 0);
    while (true) {
      Eigen::VectorXd w(d);
      for (int j = 0; j < d; ++j) w[j] = -eps + (idx[j] + 0.5) * 2.0 * eps / net_per_dim;
      if (w.norm() < eps) net.push_back(w);
      int j = 0;
      while (j < d && ++idx[j] == net_per_dim) idx[j++] = 0;
      if (j == d) break;
    }
    A5Row row{eps, Eigen::MatrixXd::Zero(d, d), 0, static_cast<int>(net.size())};
    if (is_flat(m)) {
      // Off the cut loci the chart Hessian is the constant 2 I.
      for (std::size_t i = 0; i < wp.points.size(); ++i) {
        for (const auto& w : net) chart_hessian(m, q0, w, wp.points[i]);
      }
      rows.push_back(row);
      continue;
    }
    std::vector<std::vector<ManifoldPoint>> pts(net.size() + 1);
    auto fill = [&](std::vector<ManifoldPoint>& out, const Eigen::VectorXd& w) {
      for (const auto& s : offsets) out.push_back(m.exp_frame(q0, w + s));
    };
    fill(pts[0], Eigen::VectorXd::Zero(d));
    for (std::size_t k = 0; k < net.size(); ++k) fill(pts[k + 1], net[k]);
    std::vector<double> f(offsets.size());
    for (std::size_t i = 0; i < wp.points.size(); ++i) {
      const ManifoldPoint& p = wp.points[i];
      auto hess_at = [&](const std::vector<ManifoldPoint>& st) {
        for (std::size_t s = 0; s < st.size(); ++s) f[s] = m.squared_distance(st[s], p);
        return stencil_hessian(f, d, kChartStep);
      };
      const Eigen::MatrixXd h0 = hess_at(pts[0]);
      Eigen::MatrixXd sup = Eigen::MatrixXd::Zero(d, d);
      for (std::size_t k = 1; k < pts.size(); ++k) sup = sup.cwiseMax((hess_at(pts[k]) - h0).cwiseAbs());
      row.modulus += wp.weights[i] * sup;
    }
    row.max_entry = row.modulus.maxCoeff();
    rows.push_back(row);
  }
  return rows;
}

A2bReport check_a2b(const MeasureSpec& spec, const ManifoldPoint& q0, double chart_radius, int grid_points) {
  const Manifold& m = spec.model();
  m.validate(q0);
  if (!(chart_radius > 0 && chart_radius < m.injectivity_radius(q0))) {
    throw DomainError("check_a2b: chart radius must be in (0, injectivity radius)");
  }
  if (grid_points < 2) throw DomainError("check_a2b: need at least two radii");
  A2bReport r;
  for (int k = 0; k < grid_points; ++k) {
    const double rho = chart_radius * std::pow(100.0, -static_cast<double>(k) / (grid_points - 1));
    const double mass =
        measure_of_region(spec, [&](const ManifoldPoint& p) { return m.distance_to_cut(p, q0) < rho; });
    r.radii.push_back(rho);
    r.masses.push_back(mass);
    if (!(mass < 1e-12)) r.holds = false;
  }
  r.witness_mass = r.masses.front();
  return r;
}

}  // namespace rfm
