#include "rholpa/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "rholpa/random.hpp"

namespace rholpa {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double ceil_beta(double beta) { return std::ceil(beta - 1e-12); }

}  // namespace

Dataset::Dataset(int dim, std::vector<double> x, std::vector<double> y)
    : dim_(dim), x_(std::move(x)), y_(std::move(y)) {
  if (dim_ < 1) throw std::invalid_argument("Dataset: dimension must be >= 1");
  if (x_.size() != y_.size() * static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("Dataset: x and y sizes disagree");
  }
}

void Dataset::push_back(std::span<const double> x, double y) {
  if (x.size() != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("Dataset: point dimension mismatch");
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("Dataset: x outside [0,1]^d");
  }
  if (!std::isfinite(y)) throw std::invalid_argument("Dataset: non-finite response");
  x_.insert(x_.end(), x.begin(), x.end());
  y_.push_back(y);
}

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian:
      return "gaussian";
    case NoiseFamily::laplace:
      return "laplace";
    case NoiseFamily::cauchy:
      return "cauchy";
  }
  return "unknown";
}

NoiseFamily noise_family_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseFamily::gaussian;
  if (s == "laplace") return NoiseFamily::laplace;
  if (s == "cauchy") return NoiseFamily::cauchy;
  throw std::invalid_argument("unknown noise family '" + s + "'");
}

SymmetricDensity unit_density(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian:
      return {"gaussian",
              [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(two_pi); },
              [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }};
    case NoiseFamily::laplace:
      return {"laplace", [](double z) { return 0.5 * std::exp(-std::abs(z)); },
              [](double z) { return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z); }};
    case NoiseFamily::cauchy:
      return {"cauchy",
              [](double z) { return 1.0 / (std::numbers::pi * (1.0 + z * z)); },
              [](double z) { return 0.5 + std::atan(z) / std::numbers::pi; }};
  }
  throw std::invalid_argument("unit_density: unknown family");
}

double unit_quantile(NoiseFamily f, double u) {
  // Evaluate on the lower half and mirror so that q(1 - u) = -q(u) exactly.
  const bool upper = u > 0.5;
  const double tail = upper ? 1.0 - u : u;  // in (0, 1/2]
  double q = 0.0;
  switch (f) {
    case NoiseFamily::gaussian:
      q = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * tail);
      break;
    case NoiseFamily::laplace:
      q = std::log(2.0 * tail);
      break;
    case NoiseFamily::cauchy:
      q = -std::tan(std::numbers::pi * (0.5 - tail));
      break;
  }
  return upper ? -q : q;
}

NoiseModel NoiseModel::none() {
  NoiseModel m;
  m.silent = true;
  return m;
}

double NoiseModel::scale(std::size_t i) const {
  if (silent) return 0.0;
  if (!(sigma_min > 0.0)) throw std::invalid_argument("NoiseModel: sigma_min must be > 0");
  if (!(ratio >= 1.0)) throw std::invalid_argument("NoiseModel: ratio must be >= 1");
  double s = sigma_min;
  switch (pattern) {
    case ScalePattern::constant:
      break;
    case ScalePattern::alternating:
      s = sigma_min * (i % 2 == 0 ? 1.0 : ratio);
      break;
    case ScalePattern::sinusoidal:
      s = sigma_min *
          (1.0 + (ratio - 1.0) * 0.5 * (1.0 + std::sin(two_pi * static_cast<double>(i) / period)));
      break;
  }
  if (!(s >= sigma_min)) throw std::logic_error("NoiseModel: sigma_i fell below sigma_min");
  return s;
}

nlohmann::json NoiseModel::to_json() const {
  if (silent) return {{"family", "none"}};
  std::string pat = "constant";
  if (pattern == ScalePattern::alternating) pat = "alternating";
  if (pattern == ScalePattern::sinusoidal) pat = "sinusoidal";
  return {{"family", to_string(family)}, {"scale", sigma_min}, {"pattern", pat},
          {"ratio", ratio},              {"period", period}};
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "none") return none();
  NoiseModel m;
  m.family = noise_family_from_string(fam);
  m.sigma_min = j.value("scale", 1.0);
  const std::string pat = j.value("pattern", std::string("constant"));
  if (pat == "constant") {
    m.pattern = ScalePattern::constant;
  } else if (pat == "alternating") {
    m.pattern = ScalePattern::alternating;
  } else if (pat == "sinusoidal") {
    m.pattern = ScalePattern::sinusoidal;
  } else {
    throw std::invalid_argument("unknown scale pattern '" + pat + "'");
  }
  m.ratio = j.value("ratio", 1.0);
  m.period = j.value("period", 16.0);
  if (!(m.sigma_min > 0.0)) throw std::invalid_argument("noise scale must be > 0");
  if (!(m.ratio >= 1.0)) throw std::invalid_argument("noise ratio must be >= 1");
  if (!(m.period > 0.0)) throw std::invalid_argument("noise period must be > 0");
  return m;
}

nlohmann::json TestFunction::to_json() const {
  nlohmann::json j = params;
  j["name"] = name;
  j["dim"] = dim;
  j["beta"] = beta;
  j["L"] = lipschitz;
  j["M"] = bound;
  return j;
}

int floor_strict(double beta) {
  const double f = std::floor(beta);
  return static_cast<int>(f == beta ? f - 1.0 : f);
}

TestFunction sinusoid(double beta, double amplitude) {
  if (!(beta > 0.0)) throw std::invalid_argument("sinusoid: beta must be > 0");
  const int m = floor_strict(beta);
  TestFunction f;
  f.name = "sinusoid";
  f.dim = 1;
  f.beta = beta;
  f.lipschitz = std::abs(amplitude) * std::pow(two_pi, m + 1);
  double bound = 0.0;
  for (int k = 0; k <= static_cast<int>(ceil_beta(beta)); ++k) bound += std::pow(two_pi, k);
  f.bound = std::abs(amplitude) * bound;
  f.value = [amplitude](std::span<const double> x) { return amplitude * std::sin(two_pi * x[0]); };
  f.derivative = [amplitude](const MultiIndex& p, std::span<const double> x) -> std::optional<double> {
    const int k = p[0];
    return amplitude * std::pow(two_pi, k) * std::sin(two_pi * x[0] + k * std::numbers::pi / 2.0);
  };
  f.params = {{"amplitude", amplitude}};
  return f;
}

TestFunction cusp(double beta, std::vector<double> center, double amplitude) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("cusp: beta must lie in (0, 1]");
  if (center.empty()) throw std::invalid_argument("cusp: empty center");
  TestFunction f;
  f.name = "cusp";
  f.dim = static_cast<int>(center.size());
  f.beta = beta;
  f.lipschitz = std::abs(amplitude);
  double far = 0.0;
  for (double c : center) far += std::max(c, 1.0 - c);
  f.bound = std::abs(amplitude) * std::pow(far, beta);
  auto value = [beta, center, amplitude](std::span<const double> x) {
    double dist = 0.0;
    for (std::size_t j = 0; j < center.size(); ++j) dist += std::abs(x[j] - center[j]);
    return amplitude * std::pow(dist, beta);
  };
  f.value = value;
  f.derivative = [value](const MultiIndex& p, std::span<const double> x) -> std::optional<double> {
    if (total_degree(p) == 0) return value(x);
    return std::nullopt;
  };
  f.params = {{"amplitude", amplitude}, {"center", center}};
  return f;
}

TestFunction product_sinusoid(double beta, double amplitude) {
  if (!(beta > 0.0)) throw std::invalid_argument("product_sinusoid: beta must be > 0");
  const int m = floor_strict(beta);
  TestFunction f;
  f.name = "product_sinusoid";
  f.dim = 2;
  f.beta = beta;
  // Partials of order m + 1 are bounded by A (2 pi)^{m+1}; the l1 distance on
  // the square reaches 2, hence the 2^{1 - (beta - m)} factor.
  f.lipschitz = std::abs(amplitude) * std::pow(two_pi, m + 1) * std::pow(2.0, 1.0 - (beta - m));
  const MultiIndexSet s(static_cast<int>(ceil_beta(beta)), 2);
  double bound = 0.0;
  for (const auto& p : s.indices()) bound += std::pow(two_pi, total_degree(p));
  f.bound = std::abs(amplitude) * bound;
  f.value = [amplitude](std::span<const double> x) {
    return amplitude * std::sin(two_pi * x[0]) * std::sin(two_pi * x[1]);
  };
  f.derivative = [amplitude](const MultiIndex& p, std::span<const double> x) -> std::optional<double> {
    const double a = std::sin(two_pi * x[0] + p[0] * std::numbers::pi / 2.0);
    const double b = std::sin(two_pi * x[1] + p[1] * std::numbers::pi / 2.0);
    return amplitude * std::pow(two_pi, p[0] + p[1]) * a * b;
  };
  f.params = {{"amplitude", amplitude}};
  return f;
}

TestFunction constant_function(double c, int dim, double beta) {
  TestFunction f;
  f.name = "constant";
  f.dim = dim;
  f.beta = beta;
  f.lipschitz = 0.0;
  f.bound = std::abs(c);
  f.value = [c](std::span<const double>) { return c; };
  f.derivative = [c](const MultiIndex& p, std::span<const double>) -> std::optional<double> {
    return total_degree(p) == 0 ? c : 0.0;
  };
  f.params = {{"value", c}};
  return f;
}

TestFunction polynomial(const MultiIndexSet& s, std::vector<double> coefficients,
                        std::vector<double> center) {
  if (coefficients.size() != s.size()) throw std::invalid_argument("polynomial: coefficient count");
  if (center.size() != static_cast<std::size_t>(s.dim())) {
    throw std::invalid_argument("polynomial: center dimension");
  }
  TestFunction f;
  f.name = "polynomial";
  f.dim = s.dim();
  f.beta = s.degree() + 1.0;
  f.lipschitz = 0.0;
  auto derivative = [s, coefficients, center](const MultiIndex& p,
                                              std::span<const double> x) -> std::optional<double> {
    double total = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const MultiIndex& q = s[k];
      double term = coefficients[k];
      for (std::size_t j = 0; j < q.size() && term != 0.0; ++j) {
        if (q[j] < p[j]) {
          term = 0.0;
          break;
        }
        for (int r = 0; r < p[j]; ++r) term *= (q[j] - r);
        term *= std::pow(x[j] - center[j], q[j] - p[j]);
      }
      total += term;
    }
    return total;
  };
  // Crude but valid bound on sum_p sup |D^p f| over the cube.
  double bound = 0.0;
  for (const auto& p : s.indices()) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      const MultiIndex& q = s[k];
      double term = std::abs(coefficients[k]);
      for (std::size_t j = 0; j < q.size() && term != 0.0; ++j) {
        if (q[j] < p[j]) {
          term = 0.0;
          break;
        }
        for (int r = 0; r < p[j]; ++r) term *= (q[j] - r);
        term *= std::pow(std::max(center[j], 1.0 - center[j]), q[j] - p[j]);
      }
      bound += term;
    }
  }
  f.bound = bound;
  f.value = [derivative, dim = s.dim()](std::span<const double> x) {
    return *derivative(MultiIndex(static_cast<std::size_t>(dim), 0), x);
  };
  f.derivative = derivative;
  f.params = {{"degree", s.degree()}, {"coefficients", coefficients}, {"center", center}};
  return f;
}

std::vector<TestFunction> test_function_library() {
  return {sinusoid(2.0),          sinusoid(1.0),          sinusoid(3.0),
          cusp(0.5, {0.5}),       cusp(1.0, {0.5}),       product_sinusoid(2.0),
          constant_function(1.0, 1)};
}

TestFunction test_function_from_json(const nlohmann::json& j) {
  const std::string name = j.at("name").get<std::string>();
  const double amplitude = j.value("amplitude", 1.0);
  if (name == "sinusoid") return sinusoid(j.at("beta").get<double>(), amplitude);
  if (name == "product_sinusoid") return product_sinusoid(j.at("beta").get<double>(), amplitude);
  if (name == "cusp") {
    return cusp(j.at("beta").get<double>(), j.at("center").get<std::vector<double>>(), amplitude);
  }
  if (name == "constant") {
    return constant_function(j.at("value").get<double>(), j.value("dim", 1), j.value("beta", 1.0));
  }
  if (name == "polynomial") {
    const int dim = static_cast<int>(j.at("center").size());
    return polynomial(MultiIndexSet(j.at("degree").get<int>(), dim),
                      j.at("coefficients").get<std::vector<double>>(),
                      j.at("center").get<std::vector<double>>());
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

HolderCertificate certify_holder(const TestFunction& f, int pairs, std::uint64_t seed) {
  HolderCertificate cert;
  const int m = floor_strict(f.beta);
  const double expo = f.beta - m;
  const MultiIndexSet top(m, f.dim);
  std::vector<MultiIndex> top_indices;
  for (const auto& p : top.indices()) {
    if (total_degree(p) == m) top_indices.push_back(p);
  }
  Xoshiro256 rng(seed, 7);
  const auto d = static_cast<std::size_t>(f.dim);
  std::vector<double> x(d);
  std::vector<double> y(d);
  cert.holder_ok = true;
  for (int k = 0; k < pairs; ++k) {
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = rng.uniform();
      y[j] = rng.uniform();
      dist += std::abs(x[j] - y[j]);
    }
    for (const auto& p : top_indices) {
      const auto fx = f.derivative(p, x);
      const auto fy = f.derivative(p, y);
      if (!fx || !fy) {
        cert.holder_ok = false;
        continue;
      }
      const double diff = std::abs(*fx - *fy);
      const double allowed = f.lipschitz * std::pow(dist, expo);
      if (allowed > 0.0) {
        cert.worst_ratio = std::max(cert.worst_ratio, diff / allowed);
        if (diff > allowed * (1.0 + 1e-9) + 1e-12) cert.holder_ok = false;
      } else if (diff > 1e-9) {
        cert.holder_ok = false;
      }
    }
  }

  // Sup-norms on a regular grid.
  const int per_axis = f.dim == 1 ? 2001 : (f.dim == 2 ? 101 : 21);
  std::vector<double> sup(top.size(), 0.0);
  std::vector<int> idx(d, 0);
  bool done = false;
  while (!done) {
    for (std::size_t j = 0; j < d; ++j) x[j] = static_cast<double>(idx[j]) / (per_axis - 1);
    for (std::size_t k = 0; k < top.size(); ++k) {
      const auto v = f.derivative(top[k], x);
      if (v) sup[k] = std::max(sup[k], std::abs(*v));
    }
    done = true;
    for (std::size_t j = 0; j < d; ++j) {
      if (++idx[j] < per_axis) {
        done = false;
        break;
      }
      idx[j] = 0;
    }
  }
  for (double s : sup) cert.derivative_sum += s;
  cert.bound_ok = cert.derivative_sum <= f.bound * (1.0 + 1e-12) + 1e-15;
  return cert;
}

bool certify_symmetric_unimodal(const SymmetricDensity& g, double zmax, int points) {
  double previous = g.pdf(0.0);
  for (int k = 1; k <= points; ++k) {
    const double z = zmax * k / points;
    const double v = g.pdf(z);
    if (v != g.pdf(-z)) return false;
    if (v > previous) return false;
    previous = v;
  }
  return true;
}

std::vector<double> gen_design(std::size_t n, int dim, std::uint64_t seed) {
  Xoshiro256 rng(seed, static_cast<std::uint64_t>(Stream::design));
  std::vector<double> x(n * static_cast<std::size_t>(dim));
  for (double& v : x) v = rng.uniform();
  return x;
}

std::vector<double> gen_noise(const NoiseModel& model, std::size_t n, std::uint64_t seed,
                              bool antithetic) {
  std::vector<double> e(n, 0.0);
  if (model.silent) return e;
  Xoshiro256 rng(seed, static_cast<std::uint64_t>(Stream::noise));
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform();
    if (antithetic) u = 1.0 - u;
    e[i] = model.scale(i) * unit_quantile(model.family, u);
  }
  return e;
}

Dataset gen_data(const TestFunction& f, const NoiseModel& model, std::size_t n,
                 std::uint64_t seed) {
  std::vector<double> x = gen_design(n, f.dim, seed);
  std::vector<double> y = gen_noise(model, n, seed);
  const auto d = static_cast<std::size_t>(f.dim);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += f.value(std::span<const double>(x.data() + i * d, d));
  }
  return Dataset(f.dim, std::move(x), std::move(y));
}

}  // namespace rholpa
