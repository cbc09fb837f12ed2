#include "rfm/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfm/clt.hpp"
#include "rfm/counterexample.hpp"
#include "rfm/detail/json_fields.hpp"
#include "rfm/stability.hpp"

#ifndef RFM_VERSION
#define RFM_VERSION "0.0.0"
#endif

namespace rfm {

using nlohmann::json;
using detail::field;
using detail::field_or;
using detail::require_keys;
using detail::vec_to_json;

const char* library_version() { return RFM_VERSION; }

namespace {

const std::vector<std::string> kExperiments{"clt", "matrices", "stability", "counterexample", "consistency"};

json coords(const ManifoldPoint& p) { return vec_to_json(p.coords); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check(std::vector<CheckResult>& out, std::string name, bool ok, std::string detail) {
  out.push_back({std::move(name), ok, std::move(detail)});
}

json checks_json(const std::vector<CheckResult>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return a;
}

// --- clt -------------------------------------------------------------------

struct CltConfig {
  MeasureSpec measure;
  ManifoldPoint q0;
  CltOptions options;
  double frobenius_tol;
  bool check_ks;
};

CltConfig parse_clt(const json& p, std::uint64_t seed) {
  const std::string w = "clt";
  require_keys(p, {"measure", "q0", "n", "reps", "parallelism", "chart_radius", "frobenius_tol", "check_ks"}, w);
  const MeasureSpec m = measure_from_json(field<json>(p, "measure", w));
  CltConfig c{m, point_from_json(m.model(), field<json>(p, "q0", w)), {}, 0.10, true};
  c.options.n = field<std::size_t>(p, "n", w);
  c.options.reps = field<int>(p, "reps", w);
  c.options.seed = seed;
  c.options.parallelism = field_or(p, "parallelism", 1, w);
  if (p.contains("chart_radius")) c.options.chart_radius = field<double>(p, "chart_radius", w);
  c.frobenius_tol = field_or(p, "frobenius_tol", 0.10, w);
  c.check_ks = field_or(p, "check_ks", true, w);
  if (c.options.n < 1 || c.options.reps < 2) throw ConfigError("clt: need n >= 1 and reps >= 2");
  if (c.options.parallelism < 1) throw ConfigError("clt.parallelism: must be >= 1");
  return c;
}

json matrix_json(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) rows.push_back(vec_to_json(a.row(i).transpose()));
  return rows;
}

RunOutcome run_clt(const json& p, std::uint64_t seed, std::optional<int> par) {
  CltConfig c = parse_clt(p, seed);
  if (par) c.options.parallelism = *par;
  const CltReport r = run_clt_experiment(c.measure, c.q0, c.options);
  RunOutcome out;
  check(out.checks, "frobenius_rel_err", r.frobenius_rel_err < c.frobenius_tol,
        fmt(r.frobenius_rel_err) + " < " + fmt(c.frobenius_tol));
  if (c.check_ks) {
    double worst = 0;
    for (double k : r.normality.ks_theory) worst = std::max(worst, k);
    check(out.checks, "ks_theory", r.normality.ks_pass, fmt(worst) + " < " + fmt(r.normality.ks_critical));
  }
  const auto& n = r.normality;
  out.report = {{"lambda", matrix_json(r.matrices.lambda)},
                {"c", matrix_json(r.matrices.c)},
                {"sandwich", matrix_json(r.matrices.sandwich)},
                {"condition_number_lambda", r.matrices.condition_number_lambda},
                {"mean_gradient", vec_to_json(r.matrices.mean_gradient)},
                {"empirical_cov", matrix_json(r.empirical_cov)},
                {"empirical_mean", vec_to_json(r.empirical_mean)},
                {"frobenius_rel_err", r.frobenius_rel_err},
                {"frobenius_tol", c.frobenius_tol},
                {"n", r.n},
                {"reps", r.reps},
                {"successes", r.successes},
                {"failures", r.failures},
                {"normality",
                 {{"ks_theory", n.ks_theory},
                  {"ks_fitted", n.ks_fitted},
                  {"ks_critical", n.ks_critical},
                  {"alpha", 1e-3},
                  {"mardia_skewness", n.mardia_skewness},
                  {"mardia_skew_pvalue", n.mardia_skew_pvalue},
                  {"mardia_kurtosis", n.mardia_kurtosis},
                  {"mardia_kurtosis_z", n.mardia_kurtosis_z},
                  {"z_critical", n.z_critical},
                  {"ks_pass", n.ks_pass},
                  {"mardia_pass", n.mardia_pass}}}};
  std::ostringstream csv;
  const int d = static_cast<int>(r.matrices.lambda.rows());
  csv << "trial,seed,ok,iterations";
  for (int j = 0; j < d; ++j) csv << ",dev_" << j;
  csv << "\n";
  for (const auto& t : r.trials) {
    csv << t.trial << "," << t.seed << "," << (t.ok ? 1 : 0) << "," << t.iterations;
    for (int j = 0; j < d; ++j) csv << "," << fmt(t.deviation[j]);
    csv << "\n";
  }
  out.csv = csv.str();
  return out;
}

// --- matrices --------------------------------------------------------------

RunOutcome run_matrices(const json& p) {
  const std::string w = "matrices";
  require_keys(p, {"measure", "q0", "eps_list", "net_per_dim", "chart_radius"}, w);
  const MeasureSpec m = measure_from_json(field<json>(p, "measure", w));
  const ManifoldPoint q0 = point_from_json(m.model(), field<json>(p, "q0", w));
  const auto eps_list = field_or(p, "eps_list", std::vector<double>{0.1, 0.05, 0.025}, w);
  const int net = field_or(p, "net_per_dim", 64, w);
  const double inj = m.model().injectivity_radius(q0);
  const double chart = field_or(p, "chart_radius", std::min(0.1, 0.5 * inj), w);
  for (double e : eps_list) {
    if (!(e > 0)) throw ConfigError("matrices.eps_list: entries must be positive");
  }
  if (net < 2) throw ConfigError("matrices.net_per_dim: must be >= 2");

  const CltMatrices mx = clt_matrices(m, q0);
  const auto rows = a5_modulus(m, q0, eps_list, net);
  const A2bReport a2b = check_a2b(m, q0, chart);
  RunOutcome out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mx.lambda);
  check(out.checks, "lambda_positive_definite", es.eigenvalues().minCoeff() > 0,
        "min eigenvalue " + fmt(es.eigenvalues().minCoeff()));
  check(out.checks, "mean_gradient_zero", mx.mean_gradient.norm() <= kMeanGradientTol,
        fmt(mx.mean_gradient.norm()) + " <= " + fmt(kMeanGradientTol));
  check(out.checks, "a2b", a2b.holds, "witness mass " + fmt(a2b.witness_mass));
  json a5 = json::array();
  std::ostringstream csv;
  csv << "eps,max_entry,net_points\n";
  for (const auto& r : rows) {
    a5.push_back({{"eps", r.eps}, {"modulus", matrix_json(r.modulus)}, {"max_entry", r.max_entry},
                  {"net_points", r.net_points}});
    csv << fmt(r.eps) << "," << fmt(r.max_entry) << "," << r.net_points << "\n";
  }
  out.report = {{"lambda", matrix_json(mx.lambda)},
                {"c", matrix_json(mx.c)},
                {"sandwich", matrix_json(mx.sandwich)},
                {"condition_number_lambda", mx.condition_number_lambda},
                {"mean_gradient", vec_to_json(mx.mean_gradient)},
                {"a5_modulus", a5},
                {"a2b", {{"holds", a2b.holds}, {"witness_mass", a2b.witness_mass}, {"radii", a2b.radii},
                         {"masses", a2b.masses}}}};
  out.csv = csv.str();
  return out;
}

// --- stability -------------------------------------------------------------

RunOutcome run_stability(const json& p, std::uint64_t seed) {
  const std::string w = "stability";
  require_keys(p, {"model", "p", "neighborhood", "r_list", "samples", "expect_stable", "trumpet_witness"}, w);
  const Manifold m = model_from_json(field<json>(p, "model", w));
  const ManifoldPoint base = point_from_json(m, field<json>(p, "p", w));
  const json nb = field<json>(p, "neighborhood", w);
  require_keys(nb, {"type", "eps", "delta"}, w + ".neighborhood");
  const auto type = field<std::string>(nb, "type", w + ".neighborhood");
  const auto r_list = field<std::vector<double>>(p, "r_list", w);
  if (r_list.empty()) throw ConfigError("stability.r_list: must not be empty");
  ProbeOptions po;
  po.samples = field_or(p, "samples", 10000, w);
  po.seed = seed;
  StabilityProbeResult res;
  try {
    if (type == "metric_ball") {
      res = probe_metric_stability(m, base, field<double>(nb, "eps", w + ".neighborhood"), r_list, po);
    } else if (type == "cylinder_funnel") {
      res = probe_topological_stability(m, base, NeighborhoodSpec::cylinder_funnel(base), r_list, po);
    } else if (type == "trumpet_funnel") {
      res = probe_topological_stability(
          m, base, NeighborhoodSpec::trumpet_funnel(base, field<double>(nb, "delta", w + ".neighborhood")), r_list, po);
    } else {
      throw ConfigError("stability.neighborhood.type: unknown '" + type + "'");
    }
  } catch (const ModelMismatchError& e) {
    throw ConfigError(std::string("stability: ") + e.what());
  }
  RunOutcome out;
  out.report = probe_to_json(res);
  if (res.witness) {
    const NeighborhoodSpec nbhd = type == "metric_ball"
                                      ? NeighborhoodSpec::metric_ball(m.cut_locus(base), field<double>(nb, "eps", w))
                                  : type == "cylinder_funnel" ? NeighborhoodSpec::cylinder_funnel(base)
                                                              : NeighborhoodSpec::trumpet_funnel(base, field<double>(nb, "delta", w));
    check(out.checks, "witness_verified", verify_witness(m, base, res.r_used, nbhd, *res.generator, *res.witness),
          "r = " + fmt(res.r_used));
  }
  if (p.contains("expect_stable")) {
    const bool want = field<bool>(p, "expect_stable", w);
    check(out.checks, "expect_stable", res.stable == want,
          std::string("stable = ") + (res.stable ? "true" : "false"));
  }
  std::ostringstream csv;
  csv << "r,witness_found,ball_points,cut_points,witness_x,witness_y\n";
  for (const auto& e : res.entries) {
    csv << fmt(e.r) << "," << (e.witness_found ? 1 : 0) << "," << e.ball_points << "," << e.cut_points;
    for (int j = 0; j < 2; ++j) {
      csv << ",";
      if (e.witness && j < e.witness->coords.size()) csv << fmt(e.witness->coords[j]);
    }
    csv << "\n";
  }
  if (p.contains("trumpet_witness")) {
    const json& tw = p.at("trumpet_witness");
    require_keys(tw, {"y0", "r", "deltas"}, w + ".trumpet_witness");
    const double y0 = field<double>(tw, "y0", w + ".trumpet_witness");
    const double r = field<double>(tw, "r", w + ".trumpet_witness");
    json arr = json::array();
    csv << "\ndelta,witness_x,witness_y,distance_to_cut,closed_form,halvings,verified\n";
    for (double d : field<std::vector<double>>(tw, "deltas", w + ".trumpet_witness")) {
      TrumpetWitness t;
      try {
        t = trumpet_witness(y0, r, d);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("stability.trumpet_witness: ") + e.what());
      }
      arr.push_back({{"delta", d}, {"witness", coords(t.witness)}, {"generator", coords(t.generator)},
                     {"distance_to_cut", t.distance_to_cut}, {"closed_form", t.closed_form},
                     {"halvings", t.halvings}, {"verified", t.verified}});
      check(out.checks, "trumpet_witness_delta_" + fmt(d), t.verified, "distance " + fmt(t.distance_to_cut));
      csv << fmt(d) << "," << fmt(t.witness.coords[0]) << "," << fmt(t.witness.coords[1]) << ","
          << fmt(t.distance_to_cut) << "," << fmt(t.closed_form) << "," << t.halvings << "," << (t.verified ? 1 : 0)
          << "\n";
    }
    out.report["trumpet_witness"] = arr;
  }
  out.csv = csv.str();
  return out;
}

// --- counterexample ----------------------------------------------------------

RunOutcome run_counterexample_exp(json p, std::uint64_t seed) {
  p["seed"] = seed;
  const CounterexampleConfig cfg = counterexample_config_from_json(p);
  const CounterexampleReport r = run_counterexample(cfg);
  RunOutcome out;
  check(out.checks, "normalization", r.normalization_ok, fmt(r.normalization));
  check(out.checks, "mean_location", r.mean.passed, "distance " + fmt(r.mean.distance_to_iy_nu));
  bool tails = true;
  for (const auto& t : r.tails) tails = tails && t.passed;
  check(out.checks, "tail_bound", tails, "slope " + fmt(r.tails.front().slope));
  check(out.checks, "condition_C", r.condition_c.passed,
        "mass " + fmt(r.condition_c.mass) + ", inside " + std::to_string(r.condition_c.samples_inside));
  check(out.checks, "a2b_failure", r.a2b.passed, std::to_string(r.a2b.rows.size()) + " radii");
  check(out.checks, "contradiction_chain", r.chain.passed, std::to_string(r.chain.points) + " points");
  out.report = counterexample_to_json(r, cfg);
  out.report.erase("config");
  std::ostringstream csv;
  csv << "table,key,value_1,value_2,value_3\n";
  for (const auto& row : r.tails.front().rows) {
    csv << "tail_bound," << fmt(row.eps) << "," << fmt(row.integral) << "," << fmt(row.bound) << ","
        << fmt(row.ratio) << "\n";
  }
  for (const auto& row : r.a2b.rows) {
    csv << "a2b_failure," << fmt(row.r) << "," << fmt(row.mass) << "," << fmt(row.expected) << ",\n";
  }
  out.csv = csv.str();
  return out;
}

// --- consistency -------------------------------------------------------------

RunOutcome run_consistency(const json& p, std::uint64_t seed) {
  const std::string w = "consistency";
  require_keys(p, {"measure", "true_mean", "n_list", "reps", "grid_resolution", "slack", "shrink_factor"}, w);
  const MeasureSpec m = measure_from_json(field<json>(p, "measure", w));
  const ManifoldPoint truth = point_from_json(m.model(), field<json>(p, "true_mean", w));
  const auto n_list = field<std::vector<std::size_t>>(p, "n_list", w);
  const int reps = field<int>(p, "reps", w);
  const double slack = field_or(p, "slack", 0.2, w);
  const double shrink = field_or(p, "shrink_factor", 2.0, w);
  if (n_list.size() < 2 || reps < 1) throw ConfigError("consistency: need at least two n and reps >= 1");
  FrechetOptions fo;
  fo.grid_resolution = field_or(p, "grid_resolution", 0, w);
  const auto rows = consistency_curve(m, truth, n_list, reps, seed, fo);
  const auto med = median_errors(rows, n_list);
  RunOutcome out;
  bool mono = true, shr = true;
  for (std::size_t k = 0; k + 1 < med.size(); ++k) {
    mono = mono && med[k + 1] <= (1.0 + slack) * med[k];
    const double decades = std::log10(static_cast<double>(n_list[k + 1]) / n_list[k]);
    shr = shr && med[k + 1] * std::pow(shrink, decades) <= med[k];
  }
  check(out.checks, "non_increasing", mono, "slack " + fmt(slack));
  check(out.checks, "shrinks_per_decade", shr, "factor " + fmt(shrink));
  out.report = {{"n_list", n_list}, {"reps", reps}, {"median_errors", med}, {"slack", slack},
                {"shrink_factor", shrink}};
  std::ostringstream csv;
  csv << "n,rep,seed,error_chart,f_value,iterations\n";
  for (const auto& r : rows) {
    csv << r.n << "," << r.rep << "," << r.seed << "," << fmt(r.error_chart) << "," << fmt(r.f_value) << ","
        << r.iterations << "\n";
  }
  out.csv = csv.str();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

json ExperimentConfig::to_json() const {
  json j = params;
  j["experiment"] = experiment;
  j["seed"] = seed;
  if (output_dir) j["output_dir"] = *output_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c;
  c.experiment = field<std::string>(j, "experiment", "config");
  if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end()) {
    throw ConfigError("config.experiment: unknown experiment '" + c.experiment + "'");
  }
  c.seed = field<std::uint64_t>(j, "seed", "config");
  if (j.contains("output_dir")) c.output_dir = field<std::string>(j, "output_dir", "config");
  c.params = j;
  c.params.erase("experiment");
  c.params.erase("seed");
  c.params.erase("output_dir");
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig c = ExperimentConfig::from_json(j);
  validate_experiment_config(c);
  return c;
}

void validate_experiment_config(const ExperimentConfig& c) {
  const json& p = c.params;
  try {
    if (c.experiment == "clt") {
      parse_clt(p, c.seed);
    } else if (c.experiment == "counterexample") {
      json q = p;
      q["seed"] = c.seed;
      counterexample_config_from_json(q);
    } else if (c.experiment == "matrices") {
      require_keys(p, {"measure", "q0", "eps_list", "net_per_dim", "chart_radius"}, "matrices");
      const MeasureSpec m = measure_from_json(field<json>(p, "measure", "matrices"));
      point_from_json(m.model(), field<json>(p, "q0", "matrices"));
    } else if (c.experiment == "stability") {
      require_keys(p, {"model", "p", "neighborhood", "r_list", "samples", "expect_stable", "trumpet_witness"},
                   "stability");
      const Manifold m = model_from_json(field<json>(p, "model", "stability"));
      point_from_json(m, field<json>(p, "p", "stability"));
      field<json>(p, "neighborhood", "stability");
      field<std::vector<double>>(p, "r_list", "stability");
    } else if (c.experiment == "consistency") {
      require_keys(p, {"measure", "true_mean", "n_list", "reps", "grid_resolution", "slack", "shrink_factor"},
                   "consistency");
      const MeasureSpec m = measure_from_json(field<json>(p, "measure", "consistency"));
      point_from_json(m.model(), field<json>(p, "true_mean", "consistency"));
      field<std::vector<std::size_t>>(p, "n_list", "consistency");
      field<int>(p, "reps", "consistency");
    }
  } catch (const DomainError& e) {
    throw ConfigError(c.experiment + ": " + e.what());
  } catch (const ModelMismatchError& e) {
    throw ConfigError(c.experiment + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = cfg.to_json();
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

bool RunOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunOutcome run_experiment(ExperimentConfig cfg, const RunOverrides& ov) {
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.parallelism && *ov.parallelism < 1) throw ConfigError("trials-parallelism: must be >= 1");
  validate_experiment_config(cfg);
  RunOutcome out;
  if (cfg.experiment == "clt") out = run_clt(cfg.params, cfg.seed, ov.parallelism);
  else if (cfg.experiment == "matrices") out = run_matrices(cfg.params);
  else if (cfg.experiment == "stability") out = run_stability(cfg.params, cfg.seed);
  else if (cfg.experiment == "counterexample") out = run_counterexample_exp(cfg.params, cfg.seed);
  else out = run_consistency(cfg.params, cfg.seed);
  out.experiment = cfg.experiment;
  out.config_hash = config_hash(cfg);
  json cfg_json = cfg.to_json();
  cfg_json.erase("output_dir");
  json result = std::move(out.report);
  out.report = {{"experiment", cfg.experiment},
                {"version", library_version()},
                {"config_hash", out.config_hash},
                {"config", cfg_json},
                {"checks", checks_json(out.checks)},
                {"passed", out.passed()},
                {"result", std::move(result)}};
  return out;
}

std::string write_outputs(const RunOutcome& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
  const fs::path base = fs::path(dir) / (out.experiment + "-" + out.config_hash);
  const std::string jpath = base.string() + ".json";
  {
    std::ofstream f(jpath, std::ios::binary);
    f << out.report.dump(2) << "\n";
    if (!f) throw Error("cannot write " + jpath);
  }
  std::ofstream f(base.string() + ".csv", std::ios::binary);
  f << out.csv;
  if (!f) throw Error("cannot write " + base.string() + ".csv");
  return jpath;
}

std::string list_experiments() {
  return "clt             Monte-Carlo CLT for the empirical Frechet mean against the sandwich covariance\n"
         "                required: experiment, seed, measure, q0, n, reps\n"
         "                optional: parallelism, chart_radius, frobenius_tol, check_ks\n"
         "matrices        Lambda, C, sandwich, Hessian modulus and cut-locus mass at q0\n"
         "                required: experiment, seed, measure, q0\n"
         "                optional: eps_list, net_per_dim, chart_radius\n"
         "stability       topological / metric stability probes of Cut(p), trumpet witnesses\n"
         "                required: experiment, seed, model, p, neighborhood, r_list\n"
         "                optional: samples, expect_stable, trumpet_witness\n"
         "counterexample  flat-cylinder measure mu_alpha: mean location, threshold, tail bound,\n"
         "                null neighborhood of the cut locus, non-null cut loci of balls\n"
         "                required: experiment, seed\n"
         "                optional: r, alpha, tolerance, a_r_grid, mean_grid, location_grid,\n"
         "                          location_exclusion, mean_tolerance, window_lo, window_hi, tail_eps,\n"
         "                          a2b_radii, condition_c_samples, chain_points\n"
         "consistency     median empirical-mean error across sample sizes\n"
         "                required: experiment, seed, measure, true_mean, n_list, reps\n"
         "                optional: grid_resolution, slack, shrink_factor\n"
         "all configs accept output_dir\n";
}

}  // namespace rfm
