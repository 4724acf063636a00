#pragma once

#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "rholpa/basis.hpp"

namespace rholpa {

/// Product kernels supported on [-1/2, 1/2]^d with unit mass.
class KernelSpec {
 public:
  enum class Kind { uniform, triangular, epanechnikov };

  explicit KernelSpec(Kind kind = Kind::uniform) : kind_(kind) {}

  Kind kind() const { return kind_; }
  std::string name() const;

  /// One-dimensional factor k(u); zero outside [-1/2, 1/2].
  double factor(double u) const;
  double value(std::span<const double> z) const;
  /// K_inf for dimension d.
  double sup_norm(int dim) const;
  /// Polynomial degree of the factor on each half of its support.
  int piece_degree() const;

  nlohmann::json to_json() const { return {{"kind", name()}}; }
  static KernelSpec from_json(const nlohmann::json& j);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  Kind kind_;
};

/// Entry (p, q) = int x^{p+q} K(x) dx over [-1/2, 1/2]^d, by tensor
/// Gauss-Legendre quadrature on each half-axis. `extra_nodes` raises the
/// per-panel node count above the exactness minimum.
Eigen::MatrixXd moment_matrix(const KernelSpec& k, const MultiIndexSet& s,
                              int extra_nodes = 0);

/// Smallest eigenvalue of a symmetric matrix. Throws if it is <= 1e-12.
double lambda_min(const Eigen::MatrixXd& m);

struct SigmaSeries {
  double value;
  int terms;  // index of the last summed term
};

/// Sigma = 2 + 2 sum_{l>=1} d^2 10^{2l-1} exp(-18 10^l / (pi^4 l^4) / (8 K (K + 1/3))).
SigmaSeries sigma_constant(double k_inf, int dim);

/// Constants that calibrate the deviation bound and the Lepski threshold.
struct ProcedureConstants {
  Eigen::MatrixXd moment_matrix;
  double lambda = 0.0;
  double sigma = 0.0;
  int sigma_terms = 0;
  double c = 0.0;
  double k_inf = 0.0;
  std::size_t n_b = 0;
  int dim = 0;

  nlohmann::json to_json() const;
};

ProcedureConstants procedure_constants(const KernelSpec& k, const MultiIndexSet& s, double c);

/// Risk upper-bound constant
///   (4N/(c lam))^r + N Sigma int_{4N/(c lam)}^inf r z^{r-1}
///       exp(-(z c lam / (2N) - 1)^2 / (8 K^2 (1 v rho'^2) + 4 delta c lam K (1 v rho') / (3N))) dz.
double cbar_r(double r, const ProcedureConstants& constants, double rho_prime_inf,
              double delta);

/// Integrand of the cbar_r tail integral; exposed for the endpoint identity
/// and Riemann-sum checks.
double cbar_r_integrand(double z, double r, const ProcedureConstants& constants,
                        double rho_prime_inf, double delta);

}  // namespace rholpa
