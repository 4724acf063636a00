#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rholpa/basis.hpp"
#include "rholpa/contrast.hpp"

namespace rholpa {

/// n observations (X_i, Y_i) with X_i in [0,1]^d, stored row-major.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(int dim) : dim_(dim) {}
  Dataset(int dim, std::vector<double> x, std::vector<double> y);

  int dim() const { return dim_; }
  std::size_t size() const { return y_.size(); }
  std::span<const double> x(std::size_t i) const {
    return {x_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double y(std::size_t i) const { return y_[i]; }
  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& ys() const { return y_; }

  /// Validates x in [0,1]^d and finite y.
  void push_back(std::span<const double> x, double y);

 private:
  int dim_ = 1;
  std::vector<double> x_;
  std::vector<double> y_;
};

enum class NoiseFamily { gaussian, laplace, cauchy };

std::string to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& s);

/// Unit-scale density, CDF and lower-tail quantile for a family.
SymmetricDensity unit_density(NoiseFamily f);
/// Quantile function of the unit-scale law; exactly odd about u = 1/2.
double unit_quantile(NoiseFamily f, double u);

/// How sigma_i varies with the observation index.
enum class ScalePattern { constant, alternating, sinusoidal };

/// Symmetric noise sigma_i * xi_i with xi_i i.i.d. from `family`.
///   constant:    sigma_i = sigma_min
///   alternating: sigma_i = sigma_min * (i even ? 1 : ratio)
///   sinusoidal:  sigma_i = sigma_min * (1 + (ratio - 1) (1 + sin(2 pi i / period)) / 2)
struct NoiseModel {
  NoiseFamily family = NoiseFamily::gaussian;
  double sigma_min = 1.0;
  ScalePattern pattern = ScalePattern::constant;
  double ratio = 1.0;
  double period = 16.0;
  /// Zero-noise model: every sigma_i is 0 (a degenerate but useful model).
  bool silent = false;

  static NoiseModel none();
  double scale(std::size_t i) const;

  nlohmann::json to_json() const;
  static NoiseModel from_json(const nlohmann::json& j);
};

/// A regression function with declared Hoelder parameters and analytic
/// partial derivatives. `derivative` returns nullopt for derivatives that do
/// not exist.
struct TestFunction {
  std::string name;
  int dim = 1;
  double beta = 1.0;
  double lipschitz = 1.0;
  double bound = 1.0;  // M
  std::function<double(std::span<const double>)> value;
  DerivativeOracle derivative;
  nlohmann::json params;

  double operator()(std::span<const double> x) const { return value(x); }
  nlohmann::json to_json() const;
};

/// Largest integer strictly smaller than beta.
int floor_strict(double beta);

/// A sin(2 pi x) on [0,1]. Infinitely differentiable; with m = floor_strict(beta)
/// declares L = A (2 pi)^{m+1} and M = A sum_{k <= ceil(beta)} (2 pi)^k.
TestFunction sinusoid(double beta, double amplitude = 1.0);
/// A |x - center|_1^beta, beta in (0, 1]; only the value exists.
TestFunction cusp(double beta, std::vector<double> center, double amplitude = 1.0);
/// A sin(2 pi x_1) sin(2 pi x_2) on [0,1]^2.
TestFunction product_sinusoid(double beta, double amplitude = 1.0);
/// Constant c; any beta with L = 0.
TestFunction constant_function(double c, int dim, double beta = 1.0);
/// sum_p a_p (x - center)^p over a multi-index set; exact derivatives.
TestFunction polynomial(const MultiIndexSet& s, std::vector<double> coefficients,
                        std::vector<double> center);

/// Library entries keyed by name; every entry carries certified (beta, L, M).
std::vector<TestFunction> test_function_library();

/// Builds a function from its config JSON ({"name": ..., params}).
TestFunction test_function_from_json(const nlohmann::json& j);

struct HolderCertificate {
  bool holder_ok = false;
  bool bound_ok = false;
  double worst_ratio = 0.0;  // max |D^p f(x) - D^p f(y)| / (L |x-y|_1^{beta - m})
  double derivative_sum = 0.0;
  bool ok() const { return holder_ok && bound_ok; }
};

/// Samples `pairs` random point pairs (and a grid for the sup-norms) to
/// check the two Hoelder-class displays for the declared (beta, L, M).
HolderCertificate certify_holder(const TestFunction& f, int pairs, std::uint64_t seed);

/// Checks g(z) = g(-z) and g nonincreasing on [0, zmax] on a grid.
bool certify_symmetric_unimodal(const SymmetricDensity& g, double zmax, int points);

std::vector<double> gen_design(std::size_t n, int dim, std::uint64_t seed);
/// When `antithetic` is set every uniform u is replaced by 1 - u; the
/// resulting stream is the exact negation of the plain one.
std::vector<double> gen_noise(const NoiseModel& model, std::size_t n, std::uint64_t seed,
                              bool antithetic = false);
Dataset gen_data(const TestFunction& f, const NoiseModel& model, std::size_t n,
                 std::uint64_t seed);

}  // namespace rholpa
