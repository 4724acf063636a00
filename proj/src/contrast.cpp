#include "rholpa/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rholpa/quadrature.hpp"

namespace rholpa {

double huber_value(double z, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("huber: gamma must be > 0");
  const double a = std::abs(z);
  // |z| in the tail keeps rho symmetric and non-negative.
  if (a <= gamma) return 0.5 * z * z;
  return gamma * (a - 0.5 * gamma);
}

double huber_prime(double z, double gamma) { return std::clamp(z, -gamma, gamma); }

double huber_second(double z, double gamma) { return std::abs(z) <= gamma ? 1.0 : 0.0; }

ContrastSpec ContrastSpec::huber(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("huber contrast: gamma must be finite and > 0");
  }
  return ContrastSpec(Kind::huber, gamma);
}

ContrastSpec ContrastSpec::square() {
  return ContrastSpec(Kind::square, std::numeric_limits<double>::infinity());
}

ContrastSpec ContrastSpec::absolute() { return ContrastSpec(Kind::absolute, 0.0); }

std::string ContrastSpec::name() const {
  switch (kind_) {
    case Kind::huber: {
      std::ostringstream os;
      os << "huber(" << gamma_ << ")";
      return os.str();
    }
    case Kind::square:
      return "square";
    case Kind::absolute:
      return "absolute";
  }
  return "unknown";
}

double ContrastSpec::value(double z) const {
  switch (kind_) {
    case Kind::huber:
      return huber_value(z, gamma_);
    case Kind::square:
      return 0.5 * z * z;
    case Kind::absolute:
      return std::abs(z);
  }
  return 0.0;
}

double ContrastSpec::first_derivative(double z) const {
  switch (kind_) {
    case Kind::huber:
      return huber_prime(z, gamma_);
    case Kind::square:
      return z;
    case Kind::absolute:
      return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
  }
  return 0.0;
}

namespace {

// Integral of clamp(u, -g, g) over [z, z + step]; g = inf gives the square.
double clamped_integral(double z, double step, double g) {
  const double w = z + step;
  auto region = [g](double u) { return u < -g ? -1 : (u > g ? 1 : 0); };
  const int rz = region(z);
  if (rz == region(w)) return rz == 0 ? step * (z + 0.5 * step) : rz * g * step;
  const double lo = std::min(z, w), hi = std::max(z, w);
  double total = 0.0;
  if (lo < -g) total -= g * (std::min(hi, -g) - lo);
  if (hi > g) total += g * (hi - std::max(lo, g));
  const double a = std::max(lo, -g), b = std::min(hi, g);
  if (b > a) total += 0.5 * (b - a) * (b + a);
  return step > 0.0 ? total : -total;
}

}  // namespace

double ContrastSpec::change(double z, double step) const {
  switch (kind_) {
    case Kind::huber:
      return clamped_integral(z, step, gamma_);
    case Kind::square:
      return step * (z + 0.5 * step);
    case Kind::absolute: {
      const double w = z + step;
      if ((z >= 0.0) == (w >= 0.0)) return z >= 0.0 ? step : -step;
      return std::abs(w) - std::abs(z);
    }
  }
  return 0.0;
}

double ContrastSpec::second_derivative(double z) const {
  switch (kind_) {
    case Kind::huber:
      return huber_second(z, gamma_);
    case Kind::square:
      return 1.0;
    case Kind::absolute:
      return 0.0;  // a.e.
  }
  return 0.0;
}

double ContrastSpec::derivative_bound() const {
  switch (kind_) {
    case Kind::huber:
      return gamma_;
    case Kind::square:
      return std::numeric_limits<double>::infinity();
    case Kind::absolute:
      return 1.0;
  }
  return 0.0;
}

nlohmann::json ContrastSpec::to_json() const {
  switch (kind_) {
    case Kind::huber:
      return {{"kind", "huber"}, {"gamma", gamma_}};
    case Kind::square:
      return {{"kind", "square"}};
    case Kind::absolute:
      return {{"kind", "absolute"}};
  }
  return {};
}

ContrastSpec ContrastSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "huber") return huber(j.at("gamma").get<double>());
  if (kind == "square") return square();
  if (kind == "absolute") return absolute();
  throw std::invalid_argument("unknown contrast kind '" + kind + "'");
}

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck& AssumptionReport::get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no assumption check named '" + name + "'");
}

AssumptionReport check_contrast_assumptions(const ContrastSpec& c,
                                            std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("check_contrast_assumptions: empty grid");
  constexpr double tol = 1e-12;
  AssumptionReport report;

  report.checks.push_back({"zero_at_origin", c.value(0.0) == 0.0, ""});

  bool symmetric = true;
  for (double z : grid) symmetric = symmetric && c.value(z) == c.value(-z);
  report.checks.push_back({"symmetric", symmetric, ""});

  bool convex = true;
  for (double u : grid) {
    for (double v : grid) {
      const double mid = c.value(0.5 * (u + v));
      const double chord = 0.5 * (c.value(u) + c.value(v));
      if (mid > chord + tol * (1.0 + std::abs(chord))) convex = false;
    }
  }
  report.checks.push_back({"convex", convex, ""});

  const double bound = c.derivative_bound();
  bool bounded = std::isfinite(bound);
  std::string bounded_detail = bounded ? "" : "rho' is unbounded";
  for (double z : grid) {
    if (std::abs(c.first_derivative(z)) > bound + tol) bounded = false;
  }
  report.checks.push_back({"bounded_derivative", bounded, bounded_detail});

  bool lipschitz = true;
  std::string lip_detail;
  for (double u : grid) {
    for (double v : grid) {
      const double jump = std::abs(c.first_derivative(u) - c.first_derivative(v));
      if (jump > std::abs(u - v) + tol) {
        if (lipschitz) {
          std::ostringstream os;
          os << "|rho'(" << u << ") - rho'(" << v << ")| = " << jump;
          lip_detail = os.str();
        }
        lipschitz = false;
      }
    }
  }
  report.checks.push_back({"lipschitz_derivative", lipschitz, lip_detail});
  return report;
}

double c_gamma(const SymmetricDensity& g, double gamma, double sigma_min) {
  const double upper = gamma * sigma_min;
  if (!(upper > 0.0)) throw std::invalid_argument("c_gamma: gamma * sigma_min must be > 0");
  if (std::isinf(upper)) return 1.0;
  if (g.cdf) return 2.0 * ((*g.cdf)(upper) - 0.5);
  return 2.0 * quad::integrate(g.pdf, 0.0, upper, 1e-10);
}

}  // namespace rholpa
