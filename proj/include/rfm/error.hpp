#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rfm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Points from two different model spaces were combined.
class ModelMismatchError : public Error {
 public:
  using Error::Error;
};

// Invalid coordinates, non-unit directions, radii out of range, and so on.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A query landed on (or within tolerance of) a cut locus where the requested
// quantity is not defined.
class CutLocusError : public Error {
 public:
  CutLocusError(const std::string& what, Eigen::VectorXd offending)
      : Error(what), offending_(std::move(offending)) {}
  const Eigen::VectorXd& offending_point() const { return offending_; }

 private:
  Eigen::VectorXd offending_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

// Every descent start ended on a cut-locus singularity of some sample term.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<std::size_t> indices = {})
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& sample_indices() const { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

// The expected Hessian is singular or too badly conditioned to invert.
class SingularHessianError : public Error {
 public:
  SingularHessianError(const std::string& what, Eigen::VectorXd spectrum)
      : Error(what), spectrum_(std::move(spectrum)) {}
  const Eigen::VectorXd& spectrum() const { return spectrum_; }

 private:
  Eigen::VectorXd spectrum_;
};

// An embedded numerical verification did not hold.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rfm
