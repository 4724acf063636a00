#include "rholpa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rholpa/parallel.hpp"
#include "rholpa/quadrature.hpp"
#include "rholpa/random.hpp"

namespace rholpa {

double EstimatorDescriptor::bandwidth(std::size_t n, int dim) const {
  switch (rule) {
    case Rule::minimax:
      return minimax_bandwidth(beta, lipschitz, static_cast<double>(n), dim);
    case Rule::fixed:
      return h;
    case Rule::lepski:
      return std::numeric_limits<double>::quiet_NaN();
  }
  return h;
}

std::string EstimatorDescriptor::name() const {
  std::ostringstream os;
  switch (rule) {
    case Rule::minimax:
      os << "minimax(beta=" << beta << ",L=" << lipschitz << ")";
      break;
    case Rule::fixed:
      os << "fixed(h=" << h << ")";
      break;
    case Rule::lepski:
      os << "lepski(c=" << c << ",r=" << r << ")";
      break;
  }
  os << " " << fit.contrast.name() << " b=" << fit.degree;
  return os.str();
}

nlohmann::json EstimatorDescriptor::to_json() const {
  nlohmann::json j = {{"degree", fit.degree},
                      {"M", fit.M},
                      {"kernel", fit.kernel.to_json()},
                      {"contrast", fit.contrast.to_json()},
                      {"optimizer", fit.optimizer.to_json()}};
  switch (rule) {
    case Rule::minimax:
      j["bandwidth"] = {{"rule", "minimax"}, {"beta", beta}, {"L", lipschitz}};
      break;
    case Rule::fixed:
      j["bandwidth"] = {{"rule", "fixed"}, {"h", h}};
      break;
    case Rule::lepski:
      j["bandwidth"] = {{"rule", "lepski"}, {"c", c}, {"r", r}};
      break;
  }
  return j;
}

double apply_estimator(const EstimatorDescriptor& est, const Dataset& data, const Point& x0) {
  if (est.rule == EstimatorDescriptor::Rule::lepski) {
    const BandwidthGrid grid = bandwidth_grid(data.size(), data.dim(), est.fit.degree);
    const LepskiConfig lc = LepskiConfig::from_fit(est.fit, data.dim(), est.c, est.r);
    return lepski_select(data, x0, grid, est.fit, lc).estimate();
  }
  LocalFitConfig cfg = est.fit;
  cfg.x0 = x0;
  cfg.h = est.bandwidth(data.size(), data.dim());
  return estimate_at(data, cfg);
}

namespace {

// Aggregates per-replication errors (NaN marks a failed replication).
RiskEstimate summarize(const std::vector<double>& errors, double r, std::size_t n, double h) {
  RiskEstimate est;
  est.n = n;
  est.h = h;
  est.replications = errors.size();
  quad::CompensatedSum sum;
  std::size_t ok = 0;
  for (double e : errors) {
    if (std::isnan(e)) {
      ++est.failures;
      continue;
    }
    sum.add(std::pow(e, r));
    est.max_error = std::max(est.max_error, e);
    ++ok;
  }
  if (ok == 0) {
    est.risk = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.risk = sum.value() / static_cast<double>(ok);
  quad::CompensatedSum sq;
  for (double e : errors) {
    if (std::isnan(e)) continue;
    const double dev = std::pow(e, r) - est.risk;
    sq.add(dev * dev);
  }
  const double var = ok > 1 ? sq.value() / static_cast<double>(ok - 1) : 0.0;
  est.std_error = std::sqrt(var / static_cast<double>(ok));
  est.root_risk = std::pow(est.risk, 1.0 / r);
  return est;
}

void check_failures(const RiskEstimate& est) {
  if (static_cast<double>(est.failures) > 0.01 * static_cast<double>(est.replications)) {
    std::ostringstream os;
    os << est.failures << " of " << est.replications
       << " replications failed (empty neighbourhood) at n = " << est.n;
    throw std::runtime_error(os.str());
  }
}

}  // namespace

RiskEstimate mc_risk(const EstimatorDescriptor& est, const TestFunction& f, const Point& x0,
                     const NoiseModel& model, double r, std::size_t n, std::size_t replications,
                     std::uint64_t seed) {
  if (replications < 30) throw std::invalid_argument("mc_risk: need at least 30 replications");
  if (!(r >= 1.0)) throw std::invalid_argument("mc_risk: r must be >= 1");
  const double truth = f(x0);
  std::vector<double> errors(replications);
  parallel_for(replications, [&](std::size_t i) {
    const Dataset data = gen_data(f, model, n, replication_seed(seed, i));
    try {
      errors[i] = std::abs(apply_estimator(est, data, x0) - truth);
    } catch (const EmptyNeighborhood&) {
      errors[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  RiskEstimate out = summarize(errors, r, n, est.bandwidth(n, f.dim));
  check_failures(out);
  return out;
}

RiskReport risk_curve(const EstimatorDescriptor& est, const TestFunction& f, const Point& x0,
                      const NoiseModel& model, double r, const std::vector<std::size_t>& n_grid,
                      std::size_t replications, std::uint64_t seed) {
  RiskReport report;
  report.r = r;
  report.seed = seed;
  report.replications = replications;
  report.estimator = est.name();
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    // Distinct sample sizes use distinct seed families.
    report.points.push_back(
        mc_risk(est, f, x0, model, r, n_grid[k], replications, replication_seed(seed, 1000003 + k)));
  }
  return report;
}

nlohmann::json RiskReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    pts.push_back({{"n", p.n},
                   {"h", p.h},
                   {"risk", p.risk},
                   {"std_error", p.std_error},
                   {"root_risk", p.root_risk},
                   {"max_error", p.max_error},
                   {"replications", p.replications},
                   {"failures", p.failures}});
  }
  return {{"r", r}, {"seed", seed}, {"replications", replications},
          {"estimator", estimator}, {"points", pts}};
}

nlohmann::json RateFit::to_json() const {
  return {{"slope", slope},
          {"intercept", intercept},
          {"residual_sd", residual_sd},
          {"target", target},
          {"deviation", deviation()}};
}

RateFit rate_fit(const std::vector<double>& n, const std::vector<double>& risk, double r,
                 double target) {
  if (n.size() != risk.size()) throw std::invalid_argument("rate_fit: size mismatch");
  if (n.size() < 4) throw std::invalid_argument("rate_fit: need at least 4 sample sizes");
  const auto [lo, hi] = std::minmax_element(n.begin(), n.end());
  if (*hi < 4.0 * *lo) throw std::invalid_argument("rate_fit: sample sizes must span 2 octaves");
  const std::size_t m = n.size();
  std::vector<double> xs(m);
  std::vector<double> ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(risk[i] > 0.0)) throw std::invalid_argument("rate_fit: risks must be positive");
    xs[i] = std::log(n[i]);
    ys[i] = std::log(risk[i]) / r;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double res = ys[i] - fit.intercept - fit.slope * xs[i];
    ss += res * res;
  }
  fit.residual_sd = m > 2 ? std::sqrt(ss / static_cast<double>(m - 2)) : 0.0;
  fit.target = target;
  return fit;
}

RateFit rate_fit(const RiskReport& report, double target) {
  std::vector<double> n;
  std::vector<double> risk;
  for (const auto& p : report.points) {
    n.push_back(static_cast<double>(p.n));
    risk.push_back(p.risk);
  }
  return rate_fit(n, risk, report.r, target);
}

double minimax_exponent(double beta, int dim) { return -beta / (2.0 * beta + dim); }

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
  const double m = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / m;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / m;
  const double center = (p + z2 / (2.0 * m)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double DeviationBound::bias_term() const { return std::max(1.0, bias * std::sqrt(nhd)); }

double DeviationBound::lower_limit() const {
  return 4.0 * static_cast<double>(constants->n_b) / (constants->c * constants->lambda) *
         bias_term();
}

double DeviationBound::operator()(double eps) const {
  const double nb = static_cast<double>(constants->n_b);
  const double cl = constants->c * constants->lambda;
  const double k = constants->k_inf;
  const double rho1 = std::max(1.0, rho_prime_inf);
  const double num = cl / (2.0 * nb) * eps - bias_term();
  const double den = 8.0 * k * k * rho1 * rho1 + 4.0 * k / (3.0 * nb) * rho1 * cl * eps / std::sqrt(nhd);
  return nb * constants->sigma * std::exp(-num * num / den);
}

bool TailReport::any_violation() const {
  return std::any_of(rows.begin(), rows.end(), [](const TailRow& r) { return r.violation; });
}

nlohmann::json TailReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    rs.push_back({{"epsilon", r.epsilon},
                  {"valid", r.valid},
                  {"empirical", r.empirical},
                  {"wilson_low", r.wilson_low},
                  {"wilson_high", r.wilson_high},
                  {"bound", r.valid ? nlohmann::json(r.bound) : nlohmann::json(nullptr)},
                  {"informative", r.informative},
                  {"violation", r.violation}});
  }
  return {{"h", h},
          {"n", n},
          {"replications", replications},
          {"bias_majorant", bias_majorant},
          {"lower_limit", lower_limit},
          {"failures", failures},
          {"any_violation", any_violation()},
          {"note",
           "the bound holds on the event that theta_hat stays near theta; empirical tails are "
           "unconditional"},
          {"rows", rs}};
}

TailReport tail_check(const TestFunction& f, const Point& x0, double h, std::size_t n,
                      const NoiseModel& model, const LocalFitConfig& fit,
                      const ProcedureConstants& constants, const std::vector<double>& eps_grid,
                      std::size_t replications, std::uint64_t seed) {
  if (replications == 0) throw std::invalid_argument("tail_check: need replications");
  const int d = f.dim;
  const double nhd = static_cast<double>(n) * std::pow(h, d);
  TailReport report;
  report.h = h;
  report.n = n;
  report.replications = replications;
  report.bias_majorant = f.lipschitz * d * std::pow(h, f.beta);
  const DeviationBound bound{&constants, fit.contrast.derivative_bound(), report.bias_majorant, nhd};
  report.lower_limit = bound.lower_limit();

  LocalFitConfig cfg = fit;
  cfg.x0 = x0;
  cfg.h = h;
  const double truth = f(x0);
  std::vector<double> scaled(replications);
  parallel_for(replications, [&](std::size_t i) {
    const Dataset data = gen_data(f, model, n, replication_seed(seed, i));
    try {
      scaled[i] = std::sqrt(nhd) * std::abs(estimate_at(data, cfg) - truth);
    } catch (const EmptyNeighborhood&) {
      scaled[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  std::size_t ok = 0;
  for (double s : scaled) {
    if (std::isnan(s)) {
      ++report.failures;
    } else {
      ++ok;
    }
  }
  if (ok == 0) throw std::runtime_error("tail_check: every replication failed");

  for (double eps : eps_grid) {
    TailRow row;
    row.epsilon = eps;
    std::size_t hits = 0;
    for (double s : scaled) {
      if (!std::isnan(s) && s >= eps) ++hits;
    }
    row.empirical = static_cast<double>(hits) / static_cast<double>(ok);
    const auto [lo, hi] = wilson_interval(hits, ok);
    row.wilson_low = lo;
    row.wilson_high = hi;
    row.half_width = 0.5 * (hi - lo);
    row.valid = eps >= report.lower_limit;
    row.bound = row.valid ? bound(eps) : std::numeric_limits<double>::quiet_NaN();
    row.informative = row.valid && row.bound < 1.0;
    row.violation = row.informative && row.empirical > row.bound + 3.0 * row.half_width;
    report.rows.push_back(row);
  }
  return report;
}

std::vector<ContrastRow> compare_contrasts(const TestFunction& f, const Point& x0,
                                           const NoiseModel& model, std::size_t n, double h,
                                           const LocalFitConfig& fit_template, double gamma,
                                           double r, std::size_t replications,
                                           std::uint64_t seed) {
  const double scale = model.silent ? 1.0 : model.sigma_min;
  const std::vector<std::pair<std::string, ContrastSpec>> contrasts = {
      {"square", ContrastSpec::square()},
      {"median_proxy", ContrastSpec::huber(1e-6 * scale)},
      {"huber", ContrastSpec::huber(gamma)}};
  const double truth = f(x0);
  std::vector<std::vector<double>> errors(contrasts.size(), std::vector<double>(replications));
  parallel_for(replications, [&](std::size_t i) {
    const Dataset data = gen_data(f, model, n, replication_seed(seed, i));
    for (std::size_t c = 0; c < contrasts.size(); ++c) {
      LocalFitConfig cfg = fit_template;
      cfg.x0 = x0;
      cfg.h = h;
      cfg.contrast = contrasts[c].second;
      try {
        errors[c][i] = std::abs(estimate_at(data, cfg) - truth);
      } catch (const EmptyNeighborhood&) {
        errors[c][i] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });
  std::vector<ContrastRow> rows;
  for (std::size_t c = 0; c < contrasts.size(); ++c) {
    rows.push_back({contrasts[c].first + ":" + contrasts[c].second.name(),
                    summarize(errors[c], r, n, h)});
  }
  return rows;
}

nlohmann::json AdaptiveComparison::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t k = 0; k < per_bandwidth.size(); ++k) {
    per.push_back({{"k", k},
                   {"h", per_bandwidth[k].h},
                   {"risk", per_bandwidth[k].risk},
                   {"std_error", per_bandwidth[k].std_error},
                   {"chosen", chosen_counts[k]}});
  }
  return {{"grid", grid.to_json()},
          {"per_bandwidth", per},
          {"adaptive_risk", adaptive.risk},
          {"adaptive_std_error", adaptive.std_error},
          {"best_k", best_k},
          {"best_risk", best_risk},
          {"ratio", ratio},
          {"log_factor", log_factor},
          {"threshold_constant", threshold_constant}};
}

AdaptiveComparison adaptive_vs_oracle(const TestFunction& f, const Point& x0,
                                      const NoiseModel& model, std::size_t n,
                                      const LocalFitConfig& fit_template, double c, double r,
                                      std::size_t replications, std::uint64_t seed) {
  AdaptiveComparison out;
  out.grid = bandwidth_grid(n, f.dim, fit_template.degree);
  const LepskiConfig lc = LepskiConfig::from_fit(fit_template, f.dim, c, r);
  out.threshold_constant = lc.threshold();
  const std::size_t levels = out.grid.h.size();
  const double truth = f(x0);
  std::vector<std::vector<double>> errors(levels, std::vector<double>(replications));
  std::vector<double> adaptive(replications);
  std::vector<std::size_t> chosen(replications, 0);
  parallel_for(replications, [&](std::size_t i) {
    const Dataset data = gen_data(f, model, n, replication_seed(seed, i));
    try {
      const SelectionTrace trace = lepski_select(data, x0, out.grid, fit_template, lc);
      for (std::size_t k = 0; k < levels; ++k) errors[k][i] = std::abs(trace.estimates[k] - truth);
      adaptive[i] = std::abs(trace.estimate() - truth);
      chosen[i] = trace.chosen_k;
    } catch (const EmptyNeighborhood&) {
      for (std::size_t k = 0; k < levels; ++k) errors[k][i] = std::numeric_limits<double>::quiet_NaN();
      adaptive[i] = std::numeric_limits<double>::quiet_NaN();
      chosen[i] = levels;  // not counted
    }
  });
  out.chosen_counts.assign(levels, 0);
  for (std::size_t k : chosen) {
    if (k < levels) ++out.chosen_counts[k];
  }
  for (std::size_t k = 0; k < levels; ++k) {
    out.per_bandwidth.push_back(summarize(errors[k], r, n, out.grid.h[k]));
  }
  out.adaptive = summarize(adaptive, r, n, std::numeric_limits<double>::quiet_NaN());
  check_failures(out.adaptive);
  out.best_k = 0;
  for (std::size_t k = 1; k < levels; ++k) {
    if (out.per_bandwidth[k].risk < out.per_bandwidth[out.best_k].risk) out.best_k = k;
  }
  out.best_risk = out.per_bandwidth[out.best_k].risk;
  out.ratio = out.adaptive.risk / out.best_risk;
  out.log_factor = std::pow(std::log(static_cast<double>(n)), r * f.beta / (2.0 * f.beta + f.dim));
  return out;
}

}  // namespace rholpa
