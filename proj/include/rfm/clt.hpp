#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rfm/frechet.hpp"

namespace rfm {

struct CltMatrices {
  Eigen::MatrixXd lambda;    // E Hess h(q0, Y) in the normal chart at q0
  Eigen::MatrixXd c;         // Cov grad h(q0, Y)
  Eigen::MatrixXd sandwich;  // lambda^-1 c lambda^-1
  double condition_number_lambda = 0;
  Eigen::VectorXd mean_gradient;  // E grad h(q0, Y); zero at a Frechet mean
};

inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr double kMeanGradientTol = 1e-8;

// Throws SingularHessianError when lambda is singular or its condition number
// exceeds kMaxConditionNumber, CutLocusError when the measure charges
// Cut(q0), and DomainError when q0 is not a critical point of the Frechet
// function.
CltMatrices clt_matrices(const MeasureSpec& spec, const ManifoldPoint& q0);

// Symmetric inverse via eigendecomposition, refusing ill-conditioned input.
Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& a, double max_condition = kMaxConditionNumber);

struct NormalityStats {
  std::vector<double> ks_theory;  // per coordinate, against N(0, sandwich_jj)
  std::vector<double> ks_fitted;  // per coordinate, against the fitted normal
  double ks_critical = 0;         // 0.1% level
  double mardia_skewness = 0;     // b_{1,m}
  double mardia_skew_pvalue = 1;
  double mardia_kurtosis = 0;  // b_{2,m}
  double mardia_kurtosis_z = 0;
  double z_critical = 0;  // two-sided 0.1% normal quantile
  bool ks_pass = false;
  bool mardia_pass = false;
};

// Kolmogorov statistic of the sample against the normal N(mean, sd^2).
double ks_statistic(std::vector<double> x, double mean, double sd);
// Asymptotic Kolmogorov critical value at level alpha for sample size n.
double ks_critical_value(std::size_t n, double alpha);
NormalityStats normality_tests(const std::vector<Eigen::VectorXd>& devs, const Eigen::MatrixXd& sandwich);

struct TrialRecord {
  int trial;
  std::uint64_t seed;
  bool ok;
  Eigen::VectorXd deviation;  // sqrt(n) log_{q0}(empirical mean)
  int iterations;
  std::string error;
};

struct CltOptions {
  std::size_t n = 1000;
  int reps = 2000;
  std::uint64_t seed = 1;
  int parallelism = 1;
  // Chart radius about q0; defaults to 0.9 of the injectivity radius (or
  // pi for models with infinite injectivity radius).
  std::optional<double> chart_radius;
  double max_failure_rate = 0.01;
};

struct CltReport {
  CltMatrices matrices;
  std::size_t n = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd empirical_cov;
  Eigen::VectorXd empirical_mean;
  double frobenius_rel_err = 0;
  NormalityStats normality;
  int successes = 0;
  int failures = 0;
  std::vector<TrialRecord> trials;
};

CltReport run_clt_experiment(const MeasureSpec& spec, const ManifoldPoint& q0, const CltOptions& options);

// Chart Hessian D_{jj'} h(w, p) of v -> d^2(exp_{q0}(v), p) at chart point w.
Eigen::MatrixXd chart_hessian(const Manifold& m, const ManifoldPoint& q0, const Eigen::VectorXd& w,
                              const ManifoldPoint& p);

struct A5Row {
  double eps;
  Eigen::MatrixXd modulus;  // E u_{jj'}(eps, Y)
  double max_entry;
  int net_points;
};
// The supremum over |w| < eps is taken over a net of net_per_dim^m chart
// points (the cube grid restricted to the ball).
std::vector<A5Row> a5_modulus(const MeasureSpec& spec, const ManifoldPoint& q0, const std::vector<double>& eps_list,
                              int net_per_dim = 64);

struct A2bReport {
  bool holds = true;
  double witness_mass = 0;
  std::vector<double> radii;
  std::vector<double> masses;
};
// Mass of {p : Cut(p) meets B(q0, rho)} for rho on a decreasing grid from
// chart_radius down to chart_radius / 100.
A2bReport check_a2b(const MeasureSpec& spec, const ManifoldPoint& q0, double chart_radius, int grid_points = 7);

}  // namespace rfm
