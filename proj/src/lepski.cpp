#include "rholpa/lepski.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rholpa {

double minimax_bandwidth(double beta, double lipschitz, double n, int dim) {
  if (!(beta > 0.0) || !(n > 0.0) || !(lipschitz >= 0.0) || dim < 1) {
    throw std::invalid_argument("minimax_bandwidth: beta, n must be > 0 and L >= 0");
  }
  const double h = std::pow(lipschitz * lipschitz * n, -1.0 / (2.0 * beta + dim));
  return std::min(h, 1.0);
}

double minimax_rate(double beta, double n, int dim) {
  return std::pow(n, -beta / (2.0 * beta + dim));
}

double adaptation_price(double beta, int degree, double n, int dim) {
  return 1.0 + 2.0 * (degree - beta) / ((2.0 * beta + dim) * (2.0 * degree + dim)) * std::log(n);
}

double adaptive_rate(double beta, int degree, double n, int dim) {
  return std::pow(adaptation_price(beta, degree, n, dim), beta / (2.0 * beta + dim)) * minimax_rate(beta, n, dim);
}

nlohmann::json BandwidthGrid::to_json() const {
  return {{"h_min", h_min}, {"h_max", h_max}, {"h", h}, {"k_n", k_n()}};
}

namespace {

double grid_h_min(double n, int dim) { return std::pow(std::log(n), 2.0 / dim) * std::pow(n, -1.0 / dim); }
double grid_h_max(double n, int dim, int degree) { return std::pow(n, -1.0 / (2.0 * degree + dim)); }

}  // namespace

BandwidthGrid bandwidth_grid(std::size_t n, int dim, int degree) {
  if (n < 3) throw std::invalid_argument("bandwidth_grid: n must be >= 3");
  if (dim < 1) throw std::invalid_argument("bandwidth_grid: dimension must be >= 1");
  if (degree < 1) throw std::invalid_argument("bandwidth_grid: degree must be >= 1");
  const double nd = static_cast<double>(n);
  BandwidthGrid g;
  g.h_min = grid_h_min(nd, dim);
  g.h_max = grid_h_max(nd, dim, degree);
  if (g.h_min > g.h_max) {
    std::size_t m = n;
    while (grid_h_min(static_cast<double>(m), dim) > grid_h_max(static_cast<double>(m), dim, degree)) {
      m = m < 1024 ? m + 1 : m + m / 64;
    }
    std::ostringstream os;
    os << "grid empty: h_min = " << g.h_min << " exceeds h_max = " << g.h_max << " for n = " << n
       << " (need n >= " << m << " for d = " << dim << ", b = " << degree << ")";
    throw EmptyGrid(os.str(), m);
  }
  for (double h = g.h_max; h >= g.h_min; h *= 0.5) g.h.push_back(h);
  return g;
}

double s_n(std::size_t l, std::size_t n, int dim, const BandwidthGrid& grid) {
  if (l > grid.k_n()) throw std::out_of_range("s_n: index beyond the grid");
  const double hl = grid.h[l];
  return std::sqrt((1.0 + static_cast<double>(l) * std::numbers::ln2) /
                   (static_cast<double>(n) * std::pow(hl, dim)));
}

double threshold_constant(std::size_t n_b, double c, double lambda, double k_inf,
                          double rho_prime_inf, double r, int dim) {
  if (!std::isfinite(rho_prime_inf)) {
    throw std::invalid_argument("threshold_constant: rho' must be bounded (rejects square contrast)");
  }
  if (n_b == 0 || !(c > 0.0) || !(lambda > 0.0) || !(k_inf > 0.0) || !(rho_prime_inf > 0.0) ||
      !(r >= 1.0) || dim < 1) {
    throw std::invalid_argument("threshold_constant: inputs must be positive (r >= 1)");
  }
  return 4.0 * static_cast<double>(n_b) / (c * lambda) *
         (1.0 + 2.0 * k_inf * std::max(1.0, rho_prime_inf) * std::sqrt(r * dim));
}

double threshold_constant_huber(std::size_t n_b, double half_mass, double lambda, double k_inf,
                                double gamma, double r, int dim) {
  if (!(half_mass > 0.0)) throw std::invalid_argument("threshold_constant_huber: mass must be > 0");
  return 2.0 * static_cast<double>(n_b) / (lambda * half_mass) *
         (1.0 + 2.0 * k_inf * std::max(1.0, gamma) * std::sqrt(r * dim));
}

void LepskiConfig::validate() const {
  (void)threshold_constant(n_b, c, lambda, k_inf, rho_prime_inf, r, dim);
}

double LepskiConfig::threshold() const {
  return threshold_constant(n_b, c, lambda, k_inf, rho_prime_inf, r, dim);
}

LepskiConfig LepskiConfig::from_fit(const LocalFitConfig& fit, int dim, double c, double r) {
  const MultiIndexSet s(fit.degree, dim);
  LepskiConfig cfg;
  cfg.r = r;
  cfg.c = c;
  cfg.lambda = lambda_min(moment_matrix(fit.kernel, s));
  cfg.n_b = s.size();
  cfg.k_inf = fit.kernel.sup_norm(dim);
  cfg.rho_prime_inf = fit.contrast.derivative_bound();
  cfg.dim = dim;
  cfg.validate();
  return cfg;
}

nlohmann::json SelectionTrace::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    nlohmann::json row = {{"k", k}, {"h", bandwidths[k]}, {"estimate", estimates[k]}};
    if (k < fits.size()) {
      row["n_local"] = fits[k].n_local;
      row["converged"] = fits[k].converged;
      row["iterations"] = fits[k].iterations;
    }
    rows.push_back(row);
  }
  nlohmann::json cks = nlohmann::json::array();
  for (const auto& c : checks) {
    cks.push_back({{"k", c.k}, {"l", c.l}, {"difference", c.difference},
                   {"threshold", c.threshold}, {"passed", c.passed}});
  }
  return {{"estimates", rows},
          {"chosen_k", chosen_k},
          {"h_chosen", bandwidth()},
          {"estimate", estimate()},
          {"threshold_constant", threshold_constant},
          {"checks", cks}};
}

std::size_t select_index(const std::vector<double>& estimates,
                         const std::vector<double>& thresholds,
                         std::vector<PairwiseCheck>* checks) {
  if (estimates.empty()) throw std::invalid_argument("select_index: no estimates");
  if (thresholds.size() != estimates.size()) {
    throw std::invalid_argument("select_index: thresholds and estimates differ in length");
  }
  const std::size_t last = estimates.size() - 1;
  for (std::size_t k = 0; k < last; ++k) {
    bool ok = true;
    for (std::size_t l = k + 1; l <= last; ++l) {
      const double diff = std::abs(estimates[k] - estimates[l]);
      const bool passed = diff <= thresholds[l];
      if (checks) checks->push_back({k, l, diff, thresholds[l], passed});
      if (!passed) {
        ok = false;
        break;
      }
    }
    if (ok) return k;
  }
  return last;
}

SelectionTrace lepski_select(const Dataset& data, const Point& x0, const BandwidthGrid& grid,
                             const LocalFitConfig& fit_template, const LepskiConfig& lepski) {
  if (grid.h.empty()) throw std::invalid_argument("lepski_select: empty grid");
  lepski.validate();
  SelectionTrace trace;
  trace.threshold_constant = lepski.threshold();
  trace.bandwidths = grid.h;
  std::vector<double> thresholds;
  for (std::size_t k = 0; k < grid.h.size(); ++k) {
    LocalFitConfig cfg = fit_template;
    cfg.x0 = x0;
    cfg.h = grid.h[k];
    try {
      trace.fits.push_back(fit_local(data, cfg));
    } catch (const EmptyNeighborhood& e) {
      throw EmptyNeighborhood(std::string(e.what()) + " (grid index k = " + std::to_string(k) + ")");
    }
    trace.estimates.push_back(trace.fits.back().estimate);
    thresholds.push_back(trace.threshold_constant * s_n(k, data.size(), data.dim(), grid));
  }
  trace.chosen_k = select_index(trace.estimates, thresholds, &trace.checks);
  return trace;
}

}  // namespace rholpa
