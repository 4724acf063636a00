#pragma once

#include <functional>
#include <vector>

namespace rholpa::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], exact for polynomials of degree
/// <= 2n - 1. Nodes are computed by Newton iteration on P_n.
Rule gauss_legendre(int n);

/// The same rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

/// Adaptive Gauss-Kronrod integration of f over [a, b] to the given relative
/// tolerance. Throws std::runtime_error when the tolerance is not reached.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace rholpa::quad
