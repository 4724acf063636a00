#include "rholpa/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rholpa {

namespace {

// Appends every p with |p| = remaining over coordinates [j, d), first
// coordinate descending.
void compositions(int remaining, int j, MultiIndex& current,
                  std::vector<MultiIndex>& out) {
  const int d = static_cast<int>(current.size());
  if (j == d - 1) {
    current[j] = remaining;
    out.push_back(current);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[j] = v;
    compositions(remaining - v, j + 1, current, out);
  }
  current[j] = 0;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

MultiIndexSet::MultiIndexSet(int degree, int dim) : degree_(degree), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("multi-index dimension must be >= 1");
  if (degree < 0) throw std::invalid_argument("multi-index degree must be >= 0");
  MultiIndex current(static_cast<std::size_t>(dim), 0);
  for (int k = 0; k <= degree; ++k) compositions(k, 0, current, indices_);
}

std::optional<std::size_t> MultiIndexSet::position(const MultiIndex& p) const {
  auto it = std::find(indices_.begin(), indices_.end(), p);
  if (it == indices_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - indices_.begin());
}

MultiIndexSet multi_index_set(int degree, int dim) { return MultiIndexSet(degree, dim); }

std::size_t basis_size(int degree, int dim) {
  // binomial(b + d, d) computed incrementally; exact for the sizes we use.
  std::size_t r = 1;
  for (int i = 1; i <= dim; ++i) {
    r = r * static_cast<std::size_t>(degree + i) / static_cast<std::size_t>(i);
  }
  return r;
}

void monomial_vector_into(std::span<const double> z, const MultiIndexSet& s,
                          std::span<double> out) {
  const int d = s.dim();
  const int b = s.degree();
  // powers[j * (b + 1) + k] = z_j^k
  double powers_small[4 * 8];
  std::vector<double> powers_big;
  double* powers = powers_small;
  const std::size_t need = static_cast<std::size_t>(d) * static_cast<std::size_t>(b + 1);
  if (need > std::size(powers_small)) {
    powers_big.resize(need);
    powers = powers_big.data();
  }
  for (int j = 0; j < d; ++j) {
    double acc = 1.0;
    for (int k = 0; k <= b; ++k) {
      powers[j * (b + 1) + k] = acc;
      acc *= z[static_cast<std::size_t>(j)];
    }
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    const MultiIndex& p = s[k];
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= powers[j * (b + 1) + p[static_cast<std::size_t>(j)]];
    out[k] = v;
  }
}

Eigen::VectorXd monomial_vector(std::span<const double> z, const MultiIndexSet& s) {
  if (z.size() != static_cast<std::size_t>(s.dim())) {
    throw std::invalid_argument("monomial_vector: point dimension mismatch");
  }
  for (double v : z) {
    if (!std::isfinite(v)) throw std::invalid_argument("monomial_vector: non-finite input");
  }
  Eigen::VectorXd u(static_cast<Eigen::Index>(s.size()));
  monomial_vector_into(z, s, std::span<double>(u.data(), s.size()));
  return u;
}

bool neighborhood_contains(std::span<const double> x, std::span<const double> x0,
                           double h) {
  const double half = 0.5 * h;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (std::abs(x[j] - x0[j]) > half) return false;
  }
  return true;
}

double local_polynomial_eval(const Eigen::VectorXd& t, std::span<const double> x,
                             std::span<const double> x0, double h,
                             const MultiIndexSet& s) {
  if (!(h > 0.0)) throw std::invalid_argument("local_polynomial_eval: h must be > 0");
  if (!neighborhood_contains(x, x0, h)) return 0.0;
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - x0[j]) / h;
  return t.dot(monomial_vector(z, s));
}

Eigen::VectorXd taylor_coefficients(const DerivativeOracle& f,
                                    std::span<const double> x0, double h,
                                    const MultiIndexSet& s) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) {
    const MultiIndex& p = s[k];
    auto deriv = f(p, x0);
    if (!deriv) continue;
    double denom = 1.0;
    for (int pj : p) denom *= factorial(pj);
    theta[static_cast<Eigen::Index>(k)] = *deriv * std::pow(h, total_degree(p)) / denom;
  }
  return theta;
}

}  // namespace rholpa
