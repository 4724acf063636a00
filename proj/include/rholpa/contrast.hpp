#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace rholpa {

double huber_value(double z, double gamma);
/// z clipped to [-gamma, gamma].
double huber_prime(double z, double gamma);
/// Indicator of the closed band |z| <= gamma.
double huber_second(double z, double gamma);

/// A contrast function rho together with its derivatives and the bound on
/// |rho'|. Square and absolute are baselines that violate the standing
/// assumptions (unbounded rho' / non-Lipschitz rho') and are flagged so the
/// adaptive threshold refuses them.
class ContrastSpec {
 public:
  enum class Kind { huber, square, absolute };

  static ContrastSpec huber(double gamma);
  static ContrastSpec square();
  static ContrastSpec absolute();

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  std::string name() const;

  double value(double z) const;
  double first_derivative(double z) const;
  double second_derivative(double z) const;

  /// rho(z + step) - rho(z), accurate even when it is tiny compared to rho(z).
  double change(double z, double step) const;
  /// sup |rho'|: gamma for Huber, +inf for square, 1 for absolute.
  double derivative_bound() const;

  bool violates_assumptions() const { return kind_ != Kind::huber; }

  nlohmann::json to_json() const;
  static ContrastSpec from_json(const nlohmann::json& j);

  friend bool operator==(const ContrastSpec&, const ContrastSpec&) = default;

 private:
  ContrastSpec(Kind kind, double gamma) : kind_(kind), gamma_(gamma) {}
  Kind kind_;
  double gamma_;
};

struct AssumptionCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck& get(const std::string& name) const;
};

/// Checks rho(0)=0, symmetry, midpoint convexity, |rho'| <= rho'_inf and the
/// 1-Lipschitz property of rho' on all pairs of grid points.
AssumptionReport check_contrast_assumptions(const ContrastSpec& c,
                                            std::span<const double> grid);

/// A symmetric unit-scale density. `cdf` is used when present; otherwise
/// the density is integrated numerically.
struct SymmetricDensity {
  std::string name;
  std::function<double(double)> pdf;
  std::optional<std::function<double(double)>> cdf;
};

/// c_gamma = 2 * int_0^{gamma * sigma_min} g(z) dz.
double c_gamma(const SymmetricDensity& g, double gamma, double sigma_min);

}  // namespace rholpa
