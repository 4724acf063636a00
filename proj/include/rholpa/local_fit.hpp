#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rholpa/basis.hpp"
#include "rholpa/contrast.hpp"
#include "rholpa/kernel.hpp"
#include "rholpa/simulate.hpp"

namespace rholpa {

/// Thrown when no design point lies in V_{x0}(h); the estimator is undefined.
class EmptyNeighborhood : public std::runtime_error {
 public:
  explicit EmptyNeighborhood(const std::string& what) : std::runtime_error(what) {}
};

struct OptimizerSettings {
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
  double initial_step = 1.0;
  /// Step-size shrink factor in (0, 1) used by the backtracking search.
  double backtracking = 0.5;
  /// Keep the criterion value of every accepted iterate in FitResult.
  bool record_trace = false;

  nlohmann::json to_json() const;
  static OptimizerSettings from_json(const nlohmann::json& j);
};

struct LocalFitConfig {
  Point x0;
  double h = 0.1;
  int degree = 1;
  double M = 1.0;
  KernelSpec kernel;
  ContrastSpec contrast = ContrastSpec::huber(1.0);
  OptimizerSettings optimizer;

  /// Throws std::invalid_argument on h outside (0,1], M <= 0, bad optimizer
  /// settings or an x0 outside [0,1]^dim.
  void validate(int dim) const;
};

struct FitResult {
  Eigen::VectorXd theta_hat;
  double estimate = 0.0;
  std::size_t n_local = 0;
  int iterations = 0;
  double stationarity_gap = 0.0;
  double objective = 0.0;
  bool converged = false;
  /// Fewer local samples than basis functions.
  bool underdetermined = false;
  /// Criterion at the start plus each accepted decrement (record_trace only).
  std::vector<double> objective_trace;
};

/// The local criterion
///   pi(t) = 1/(n h^d) sum_i rho(Y_i - f_t(X_i)) K((X_i - x0)/h)
/// restricted to the samples in V_{x0}(h); all others contribute nothing.
class LocalCriterion {
 public:
  LocalCriterion(const Dataset& data, const LocalFitConfig& cfg);
  /// Same criterion for a lower-degree basis over the same samples.
  LocalCriterion(const LocalCriterion& other, int degree);

  double value(const Eigen::VectorXd& t) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& t) const;
  /// Value and gradient in one pass.
  double value_and_gradient(const Eigen::VectorXd& t, Eigen::VectorXd& grad) const;

  /// Y - U t over the local samples.
  Eigen::VectorXd residuals(const Eigen::VectorXd& t) const { return y_ - design_ * t; }
  /// pi(t + s) - pi(t) given r = residuals(t), computed term by term so that
  /// small changes are not lost against the size of pi(t).
  double change(const Eigen::VectorXd& r, const Eigen::VectorXd& s) const;

  std::size_t n_local() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t basis_size() const { return basis_.size(); }
  const MultiIndexSet& basis() const { return basis_; }
  /// Kernel-weighted lower median of the local responses.
  double weighted_median() const;

 private:
  MultiIndexSet basis_;
  ContrastSpec contrast_;
  double norm_;               // 1 / (n h^d)
  Eigen::MatrixXd design_;    // n_local x N_b, rows U((X_i - x0)/h)
  Eigen::VectorXd y_;
  Eigen::VectorXd weights_;   // K((X_i - x0)/h)
};

double criterion(const Eigen::VectorXd& t, const Dataset& data, const LocalFitConfig& cfg);
Eigen::VectorXd criterion_gradient(const Eigen::VectorXd& t, const Dataset& data,
                                   const LocalFitConfig& cfg);

/// Euclidean projection onto {t : |t|_1 <= radius}; the result satisfies the
/// constraint exactly in floating point.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& t, double radius);

/// Minimizes the local criterion over the l1 ball of radius M by
/// accelerated projected gradient descent with backtracking and a monotone
/// safeguard. Throws EmptyNeighborhood when V_{x0}(h) holds no sample.
FitResult fit_local(const Dataset& data, const LocalFitConfig& cfg);

/// fit_local(...).estimate
double estimate_at(const Dataset& data, const LocalFitConfig& cfg);

}  // namespace rholpa
