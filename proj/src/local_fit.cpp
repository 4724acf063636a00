#include "rholpa/local_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rholpa {

nlohmann::json OptimizerSettings::to_json() const {
  return {{"max_iterations", max_iterations},
          {"gradient_tolerance", gradient_tolerance},
          {"initial_step", initial_step},
          {"backtracking", backtracking}};
}

OptimizerSettings OptimizerSettings::from_json(const nlohmann::json& j) {
  OptimizerSettings s;
  s.max_iterations = j.value("max_iterations", s.max_iterations);
  s.gradient_tolerance = j.value("gradient_tolerance", s.gradient_tolerance);
  s.initial_step = j.value("initial_step", s.initial_step);
  s.backtracking = j.value("backtracking", s.backtracking);
  return s;
}

void LocalFitConfig::validate(int dim) const {
  if (x0.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("x0 has dimension " + std::to_string(x0.size()) +
                                ", data has " + std::to_string(dim));
  }
  for (double v : x0) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("x0 must lie in [0,1]^d");
  }
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("bandwidth h must lie in (0, 1]");
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");
  if (!(M > 0.0) || !std::isfinite(M)) throw std::invalid_argument("M must be finite and > 0");
  if (optimizer.max_iterations <= 0) throw std::invalid_argument("max_iterations must be > 0");
  if (!(optimizer.gradient_tolerance > 0.0)) {
    throw std::invalid_argument("gradient_tolerance must be > 0");
  }
  if (!(optimizer.initial_step > 0.0)) throw std::invalid_argument("initial_step must be > 0");
  if (!(optimizer.backtracking > 0.0 && optimizer.backtracking < 1.0)) {
    throw std::invalid_argument("backtracking factor must lie in (0, 1)");
  }
}

LocalCriterion::LocalCriterion(const Dataset& data, const LocalFitConfig& cfg)
    : basis_(cfg.degree, data.dim()), contrast_(cfg.contrast) {
  cfg.validate(data.dim());
  const auto d = static_cast<std::size_t>(data.dim());
  norm_ = 1.0 / (static_cast<double>(data.size()) * std::pow(cfg.h, data.dim()));

  std::vector<std::size_t> local;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (neighborhood_contains(data.x(i), cfg.x0, cfg.h)) local.push_back(i);
  }
  const auto nl = static_cast<Eigen::Index>(local.size());
  const auto nb = static_cast<Eigen::Index>(basis_.size());
  design_.resize(nl, nb);
  y_.resize(nl);
  weights_.resize(nl);
  std::vector<double> z(d);
  std::vector<double> u(basis_.size());
  for (Eigen::Index r = 0; r < nl; ++r) {
    const std::size_t i = local[static_cast<std::size_t>(r)];
    const auto xi = data.x(i);
    for (std::size_t j = 0; j < d; ++j) z[j] = (xi[j] - cfg.x0[j]) / cfg.h;
    monomial_vector_into(z, basis_, u);
    for (Eigen::Index c = 0; c < nb; ++c) design_(r, c) = u[static_cast<std::size_t>(c)];
    y_[r] = data.y(i);
    weights_[r] = cfg.kernel.value(z);
  }
}

LocalCriterion::LocalCriterion(const LocalCriterion& other, int degree)
    : basis_(degree, other.basis_.dim()),
      contrast_(other.contrast_),
      norm_(other.norm_),
      y_(other.y_),
      weights_(other.weights_) {
  if (degree > other.basis_.degree()) {
    throw std::invalid_argument("LocalCriterion: can only reduce the degree");
  }
  // Graded ordering makes every lower-degree basis a prefix.
  design_ = other.design_.leftCols(static_cast<Eigen::Index>(basis_.size()));
}

double LocalCriterion::value(const Eigen::VectorXd& t) const {
  const Eigen::VectorXd r = y_ - design_ * t;
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) total += contrast_.value(r[i]) * weights_[i];
  return norm_ * total;
}

Eigen::VectorXd LocalCriterion::gradient(const Eigen::VectorXd& t) const {
  Eigen::VectorXd g;
  value_and_gradient(t, g);
  return g;
}

double LocalCriterion::value_and_gradient(const Eigen::VectorXd& t, Eigen::VectorXd& grad) const {
  const Eigen::VectorXd r = y_ - design_ * t;
  Eigen::VectorXd psi(r.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    total += contrast_.value(r[i]) * weights_[i];
    psi[i] = contrast_.first_derivative(r[i]) * weights_[i];
  }
  grad = -norm_ * (design_.transpose() * psi);
  return norm_ * total;
}

double LocalCriterion::change(const Eigen::VectorXd& r, const Eigen::VectorXd& s) const {
  const Eigen::VectorXd moved = design_ * s;
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) total += contrast_.change(r[i], -moved[i]) * weights_[i];
  return norm_ * total;
}

double LocalCriterion::weighted_median() const {
  if (y_.size() == 0) throw EmptyNeighborhood("weighted median of an empty neighborhood");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(y_.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return y_[a] < y_[b]; });
  const double total = weights_.sum();
  if (!(total > 0.0)) {
    // Every local sample sits where the kernel vanishes; fall back to the
    // unweighted lower median.
    return y_[order[(order.size() - 1) / 2]];
  }
  double cum = 0.0;
  for (auto i : order) {
    cum += weights_[i];
    if (cum >= 0.5 * total) return y_[i];
  }
  return y_[order.back()];
}

double criterion(const Eigen::VectorXd& t, const Dataset& data, const LocalFitConfig& cfg) {
  return LocalCriterion(data, cfg).value(t);
}

Eigen::VectorXd criterion_gradient(const Eigen::VectorXd& t, const Dataset& data,
                                   const LocalFitConfig& cfg) {
  return LocalCriterion(data, cfg).gradient(t);
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& t, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_l1_ball: radius must be > 0");
  if (t.lpNorm<1>() <= radius) return t;
  std::vector<double> u(static_cast<std::size_t>(t.size()));
  for (Eigen::Index i = 0; i < t.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(t[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double candidate = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) threshold = candidate;
  }
  Eigen::VectorXd w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double a = std::max(std::abs(t[i]) - threshold, 0.0);
    w[i] = t[i] < 0.0 ? -a : a;
  }
  // Absorb rounding so the constraint holds exactly.
  double norm = w.lpNorm<1>();
  if (norm > radius) w *= radius / norm;
  while (w.lpNorm<1>() > radius) w *= 1.0 - 0x1.0p-52;
  return w;
}

namespace {

struct Minimum {
  Eigen::VectorXd x;
  double objective;
  int iterations;
  double gap;
  bool converged;
  std::vector<double> trace;
};

double stationarity(const LocalCriterion& crit, const Eigen::VectorXd& x, double radius,
                    Eigen::VectorXd& grad) {
  crit.value_and_gradient(x, grad);
  return (x - project_l1_ball(x - grad, radius)).norm();
}

// FISTA-type projected gradient with backtracking (step allowed to grow
// again after each success) and a monotone safeguard: a momentum step that
// does not decrease the criterion is discarded and momentum restarts.
// Decisions use criterion differences rather than values, which keeps them
// meaningful down to the stationarity tolerance.
Minimum minimize(const LocalCriterion& crit, Eigen::VectorXd start, double radius,
                 const OptimizerSettings& opt) {
  Minimum result;
  Eigen::VectorXd x = project_l1_ball(start, radius);
  Eigen::VectorXd grad;
  const double f0 = crit.value(x);
  double fx = f0;  // f0 plus the accepted decrements
  if (opt.record_trace) result.trace.push_back(fx);
  Eigen::VectorXd rx = crit.residuals(x);
  double gap = stationarity(crit, x, radius, grad);
  double lipschitz = 1.0 / opt.initial_step;
  double momentum = 1.0;
  Eigen::VectorXd y = x;
  Eigen::VectorXd ry = rx;
  Eigen::VectorXd gy = grad;
  bool at_x = true;  // y == x
  int it = 0;
  while (gap > opt.gradient_tolerance && it < opt.max_iterations) {
    ++it;
    if (!at_x) {
      crit.value_and_gradient(y, gy);
      ry = crit.residuals(y);
    }
    lipschitz *= opt.backtracking;
    Eigen::VectorXd z;
    for (int bt = 0; bt < 200; ++bt) {
      z = project_l1_ball(y - gy / lipschitz, radius);
      const Eigen::VectorXd step = z - y;
      const double model = gy.dot(step) + 0.5 * lipschitz * step.squaredNorm();
      if (crit.change(ry, step) <= model) break;
      lipschitz /= opt.backtracking;
    }
    const double dz = crit.change(rx, z - x);
    if (dz < 0.0 || (at_x && dz == 0.0 && z != x)) {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = z + ((momentum - 1.0) / next) * (z - x);
      momentum = next;
      x = z;
      rx = crit.residuals(x);
      fx += dz;
      if (opt.record_trace) result.trace.push_back(fx);
      gap = stationarity(crit, x, radius, grad);
      at_x = (y - x).norm() == 0.0;
      if (at_x) {
        ry = rx;
        gy = grad;
      }
    } else if (at_x) {
      // A plain projected-gradient step from x increases the criterion:
      // x is stationary to working precision.
      break;
    } else {
      momentum = 1.0;
      y = x;
      ry = rx;
      gy = grad;
      at_x = true;
    }
  }
  result.x = std::move(x);
  result.objective = crit.value(result.x);
  result.iterations = it;
  result.gap = gap;
  result.converged = gap <= opt.gradient_tolerance;
  return result;
}

}  // namespace

FitResult fit_local(const Dataset& data, const LocalFitConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("fit_local: empty dataset");
  if (cfg.contrast.kind() == ContrastSpec::Kind::absolute) {
    throw std::invalid_argument(
        "fit_local: the absolute contrast has no gradient; use a Huber contrast with small gamma");
  }
  const LocalCriterion crit(data, cfg);
  if (crit.n_local() == 0) {
    std::ostringstream os;
    os << "empty neighborhood: no sample within h = " << cfg.h << " of x0";
    throw EmptyNeighborhood(os.str());
  }
  const auto nb = static_cast<Eigen::Index>(crit.basis_size());

  // Start: b = 0 fit seeded at the weighted median, padded with zeros.
  Eigen::VectorXd start = Eigen::VectorXd::Zero(nb);
  start[0] = crit.weighted_median();
  if (cfg.degree > 0) {
    const LocalCriterion constant(crit, 0);
    OptimizerSettings inner = cfg.optimizer;
    inner.record_trace = false;
    start[0] = minimize(constant, start.head(1), cfg.M, inner).x[0];
  }

  Minimum m = minimize(crit, start, cfg.M, cfg.optimizer);
  FitResult r;
  r.theta_hat = std::move(m.x);
  r.estimate = r.theta_hat[0];
  r.n_local = crit.n_local();
  r.iterations = m.iterations;
  r.stationarity_gap = m.gap;
  r.objective = m.objective;
  r.converged = m.converged;
  r.underdetermined = crit.n_local() < crit.basis_size();
  r.objective_trace = std::move(m.trace);
  return r;
}

double estimate_at(const Dataset& data, const LocalFitConfig& cfg) {
  return fit_local(data, cfg).estimate;
}

}  // namespace rholpa
