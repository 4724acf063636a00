#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rholpa/kernel.hpp"
#include "rholpa/lepski.hpp"
#include "rholpa/local_fit.hpp"
#include "rholpa/simulate.hpp"

namespace rholpa {

/// How the bandwidth is chosen for one estimate.
struct EstimatorDescriptor {
  enum class Rule { minimax, fixed, lepski };

  Rule rule = Rule::minimax;
  LocalFitConfig fit;      // x0 and h are filled in per call
  double beta = 1.0;       // minimax
  double lipschitz = 1.0;  // minimax
  double h = 0.1;          // fixed
  double c = 1.0;          // lepski curvature constant
  double r = 2.0;          // lepski risk power

  /// Bandwidth used for sample size n (NaN for the data-driven rule).
  double bandwidth(std::size_t n, int dim) const;
  std::string name() const;
  nlohmann::json to_json() const;
};

/// f_hat(x0) on one dataset according to the descriptor.
double apply_estimator(const EstimatorDescriptor& est, const Dataset& data, const Point& x0);

struct RiskEstimate {
  std::size_t n = 0;
  double h = 0.0;
  double risk = 0.0;        // mean |f_hat(x0) - f(x0)|^r
  double std_error = 0.0;   // sd / sqrt(replications)
  double root_risk = 0.0;   // risk^{1/r}
  double max_error = 0.0;
  std::size_t replications = 0;
  std::size_t failures = 0;  // empty neighbourhoods, excluded from the mean
};

struct RiskReport {
  std::vector<RiskEstimate> points;
  double r = 2.0;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::string estimator;
  nlohmann::json to_json() const;
};

/// Monte Carlo estimate of E|f_hat(x0) - f(x0)|^r from seeded replications.
/// Throws std::runtime_error when more than 1% of replications fail.
RiskEstimate mc_risk(const EstimatorDescriptor& est, const TestFunction& f, const Point& x0,
                     const NoiseModel& model, double r, std::size_t n, std::size_t replications,
                     std::uint64_t seed);

RiskReport risk_curve(const EstimatorDescriptor& est, const TestFunction& f, const Point& x0,
                      const NoiseModel& model, double r, const std::vector<std::size_t>& n_grid,
                      std::size_t replications, std::uint64_t seed);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_sd = 0.0;
  double target = 0.0;
  double deviation() const { return slope - target; }
  nlohmann::json to_json() const;
};

/// OLS of (1/r) ln risk on ln n. Requires >= 4 sizes spanning >= 2 octaves.
RateFit rate_fit(const std::vector<double>& n, const std::vector<double>& risk, double r,
                 double target);
RateFit rate_fit(const RiskReport& report, double target);

/// Minimax exponent -beta / (2 beta + d).
double minimax_exponent(double beta, int dim);

/// Wilson score interval for k successes in m trials at z standard normal
/// quantiles. Returns {low, high}.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

/// Terms of the deviation bound for sqrt(n h^d) |f_hat^h(x0) - f(x0)|.
struct DeviationBound {
  const ProcedureConstants* constants;
  double rho_prime_inf;
  double bias;      // b_h (or its majorant)
  double nhd;       // n h^d

  /// 1 v b_h sqrt(n h^d)
  double bias_term() const;
  /// 4 N_b / (c lam) * bias_term(): smallest eps where the bound applies.
  double lower_limit() const;
  /// N_b Sigma exp(-((c lam / (2 N_b)) eps - A)^2 / (8 K^2 (1 v rho'^2) + 4 K (1 v rho') c lam eps / (3 N_b sqrt(n h^d))))
  double operator()(double eps) const;
};

struct TailRow {
  double epsilon = 0.0;
  bool valid = false;        // eps >= lower limit
  double empirical = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double half_width = 0.0;
  double bound = 0.0;        // NaN where not valid
  bool informative = false;  // valid and bound < 1
  bool violation = false;    // informative and empirical > bound + 3 half-widths
};

struct TailReport {
  double h = 0.0;
  std::size_t n = 0;
  std::size_t replications = 0;
  double bias_majorant = 0.0;  // L d h^beta
  double lower_limit = 0.0;
  std::size_t failures = 0;
  std::vector<TailRow> rows;
  bool any_violation() const;
  nlohmann::json to_json() const;
};

/// Empirical tail P(sqrt(n h^d) |f_hat - f(x0)| >= eps) against the
/// deviation bound; the bias uses the majorant L d h^beta.
TailReport tail_check(const TestFunction& f, const Point& x0, double h, std::size_t n,
                      const NoiseModel& model, const LocalFitConfig& fit,
                      const ProcedureConstants& constants, const std::vector<double>& eps_grid,
                      std::size_t replications, std::uint64_t seed);

struct ContrastRow {
  std::string contrast;
  RiskEstimate risk;
};

/// Runs square, tiny-gamma Huber (median proxy) and Huber(gamma) on the same
/// datasets at bandwidth h.
std::vector<ContrastRow> compare_contrasts(const TestFunction& f, const Point& x0,
                                           const NoiseModel& model, std::size_t n, double h,
                                           const LocalFitConfig& fit_template, double gamma,
                                           double r, std::size_t replications,
                                           std::uint64_t seed);

struct AdaptiveComparison {
  BandwidthGrid grid;
  std::vector<RiskEstimate> per_bandwidth;  // same datasets as the adaptive run
  RiskEstimate adaptive;
  std::vector<std::size_t> chosen_counts;   // histogram of k_hat
  double best_risk = 0.0;
  std::size_t best_k = 0;
  double ratio = 0.0;                       // adaptive / best
  double log_factor = 0.0;                  // (ln n)^{r beta/(2 beta + d)}
  double threshold_constant = 0.0;
  nlohmann::json to_json() const;
};

/// Lepski estimate versus every fixed bandwidth of its grid, all on shared
/// datasets.
AdaptiveComparison adaptive_vs_oracle(const TestFunction& f, const Point& x0,
                                      const NoiseModel& model, std::size_t n,
                                      const LocalFitConfig& fit_template, double c, double r,
                                      std::size_t replications, std::uint64_t seed);

}  // namespace rholpa
