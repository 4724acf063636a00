#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rholpa {

using Point = std::vector<double>;
using MultiIndex = std::vector<int>;

/// Set of multi-indices p in N^d with |p| <= b, in graded lexicographic
/// order. The all-zeros index is always first.
///
/// Within one total degree, indices are ordered by descending first
/// coordinate, then descending second coordinate, and so on; for d = 2 and
/// degree 1 this gives (1,0) before (0,1).
class MultiIndexSet {
 public:
  MultiIndexSet(int degree, int dim);

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  /// Position of p in the ordering, or nullopt if |p| > degree.
  std::optional<std::size_t> position(const MultiIndex& p) const;

 private:
  int degree_;
  int dim_;
  std::vector<MultiIndex> indices_;
};

inline int total_degree(const MultiIndex& p) {
  int s = 0;
  for (int v : p) s += v;
  return s;
}

/// Equivalent to MultiIndexSet(b, d).
MultiIndexSet multi_index_set(int degree, int dim);

/// binomial(b + d, d), the cardinality N_b of the index set.
std::size_t basis_size(int degree, int dim);

/// U(z): entry p is prod_j z_j^{p_j}, with 0^0 = 1.
Eigen::VectorXd monomial_vector(std::span<const double> z, const MultiIndexSet& s);

/// Writes U(z) into `out` (size N_b) without allocating.
void monomial_vector_into(std::span<const double> z, const MultiIndexSet& s,
                          std::span<double> out);

/// Closed box [x0 - h/2, x0 + h/2]^d; the intersection with the unit cube is
/// implied because every design point already lies there.
bool neighborhood_contains(std::span<const double> x, std::span<const double> x0,
                           double h);

/// f_t(x) = t' U((x - x0)/h) on V_{x0}(h), zero elsewhere.
double local_polynomial_eval(const Eigen::VectorXd& t, std::span<const double> x,
                             std::span<const double> x0, double h,
                             const MultiIndexSet& s);

/// Anything that can report f(x) and (optionally) partial derivatives.
/// A missing derivative is std::nullopt.
using DerivativeOracle =
    std::function<std::optional<double>(const MultiIndex& p, std::span<const double> x)>;

/// theta_p = d^{|p|} f(x0) / dx^p * h^{|p|} / (p_1! ... p_d!), and 0 for
/// derivatives that do not exist.
Eigen::VectorXd taylor_coefficients(const DerivativeOracle& f,
                                    std::span<const double> x0, double h,
                                    const MultiIndexSet& s);

}  // namespace rholpa
