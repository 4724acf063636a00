#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "rholpa/local_fit.hpp"

namespace rholpa {

/// h = (L^2 n)^{-1/(2 beta + d)}, clamped to (0, 1].
double minimax_bandwidth(double beta, double lipschitz, double n, int dim);

/// phi_n(beta) = n^{-beta/(2 beta + d)}.
double minimax_rate(double beta, double n, int dim);

/// (ln n)-inflation of the adaptive normalization:
///   1 + 2 (b - beta) ln n / ((2 beta + d)(2 b + d)).
double adaptation_price(double beta, int degree, double n, int dim);

/// (adaptation_price / n)^{beta/(2 beta + d)}; equals minimax_rate at beta = b.
double adaptive_rate(double beta, int degree, double n, int dim);

class EmptyGrid : public std::runtime_error {
 public:
  EmptyGrid(const std::string& what, std::size_t minimal_n)
      : std::runtime_error(what), minimal_n(minimal_n) {}
  std::size_t minimal_n;
};

/// h_k = 2^{-k} h_max for k = 0..k_n, with h_min = (ln n)^{2/d} n^{-1/d},
/// h_max = n^{-1/(2b+d)} and k_n the largest k with h_k >= h_min.
struct BandwidthGrid {
  double h_min = 0.0;
  double h_max = 0.0;
  std::vector<double> h;
  std::size_t k_n() const { return h.size() - 1; }

  nlohmann::json to_json() const;
};

BandwidthGrid bandwidth_grid(std::size_t n, int dim, int degree);

/// S_n(l) = sqrt((1 + l ln 2) / (n h_l^d)).
double s_n(std::size_t l, std::size_t n, int dim, const BandwidthGrid& grid);

/// C = 4 N_b / (c lam) * (1 + 2 K_inf (1 v rho'_inf) sqrt(r d)).
double threshold_constant(std::size_t n_b, double c, double lambda, double k_inf,
                          double rho_prime_inf, double r, int dim);

/// Huber specialisation with c = c_gamma = 2 * int_0^{gamma sigma_min} g:
///   C = 2 N_b / (lam * half_mass) * (1 + 2 K_inf (1 v gamma) sqrt(r d)).
double threshold_constant_huber(std::size_t n_b, double half_mass, double lambda, double k_inf,
                                double gamma, double r, int dim);

struct LepskiConfig {
  double r = 2.0;
  double c = 1.0;
  double lambda = 1.0;
  std::size_t n_b = 1;
  double k_inf = 1.0;
  double rho_prime_inf = 1.0;
  int dim = 1;

  /// Rejects non-positive or non-finite inputs (in particular the square
  /// contrast's infinite rho'_inf).
  void validate() const;
  double threshold() const;

  /// Constants for a fit template: lambda from the kernel moment matrix,
  /// K_inf and rho'_inf from the kernel and contrast.
  static LepskiConfig from_fit(const LocalFitConfig& fit, int dim, double c, double r);
};

struct PairwiseCheck {
  std::size_t k;
  std::size_t l;
  double difference;
  double threshold;
  bool passed;
};

struct SelectionTrace {
  std::vector<double> bandwidths;
  std::vector<double> estimates;
  std::vector<FitResult> fits;
  std::size_t chosen_k = 0;
  std::vector<PairwiseCheck> checks;
  double threshold_constant = 0.0;

  double estimate() const { return estimates.at(chosen_k); }
  double bandwidth() const { return bandwidths.at(chosen_k); }
  nlohmann::json to_json() const;
};

/// k_hat = min{k : |f_k - f_l| <= thresholds[l] for all l = k+1..k_n}; the
/// last index always qualifies vacuously. Checks are appended to `checks`.
std::size_t select_index(const std::vector<double>& estimates,
                         const std::vector<double>& thresholds,
                         std::vector<PairwiseCheck>* checks = nullptr);

/// Fits every bandwidth of the grid (same data, independent fits) and applies
/// the selection rule with thresholds C * S_n(l).
SelectionTrace lepski_select(const Dataset& data, const Point& x0, const BandwidthGrid& grid,
                             const LocalFitConfig& fit_template, const LepskiConfig& lepski);

}  // namespace rholpa
