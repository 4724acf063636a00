#include "rholpa/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rholpa/quadrature.hpp"

namespace rholpa {

std::string KernelSpec::name() const {
  switch (kind_) {
    case Kind::uniform:
      return "uniform";
    case Kind::triangular:
      return "triangular";
    case Kind::epanechnikov:
      return "epanechnikov";
  }
  return "unknown";
}

double KernelSpec::factor(double u) const {
  const double a = std::abs(u);
  if (a > 0.5) return 0.0;
  switch (kind_) {
    case Kind::uniform:
      return 1.0;
    case Kind::triangular:
      return 2.0 * (1.0 - 2.0 * a);
    case Kind::epanechnikov:
      return 1.5 * (1.0 - 4.0 * u * u);
  }
  return 0.0;
}

double KernelSpec::value(std::span<const double> z) const {
  double v = 1.0;
  for (double u : z) {
    v *= factor(u);
    if (v == 0.0) return 0.0;
  }
  return v;
}

double KernelSpec::sup_norm(int dim) const {
  double peak = 1.0;
  switch (kind_) {
    case Kind::uniform:
      peak = 1.0;
      break;
    case Kind::triangular:
      peak = 2.0;
      break;
    case Kind::epanechnikov:
      peak = 1.5;
      break;
  }
  return std::pow(peak, dim);
}

int KernelSpec::piece_degree() const {
  switch (kind_) {
    case Kind::uniform:
      return 0;
    case Kind::triangular:
      return 1;
    case Kind::epanechnikov:
      return 2;
  }
  return 0;
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return KernelSpec(Kind::uniform);
  if (kind == "triangular") return KernelSpec(Kind::triangular);
  if (kind == "epanechnikov") return KernelSpec(Kind::epanechnikov);
  throw std::invalid_argument("unknown kernel kind '" + kind + "'");
}

Eigen::MatrixXd moment_matrix(const KernelSpec& k, const MultiIndexSet& s, int extra_nodes) {
  const int d = s.dim();
  const auto nb = static_cast<Eigen::Index>(s.size());
  // Per axis the integrand is a polynomial of degree <= 2b + piece_degree on
  // each half of the support.
  const int degree = 2 * s.degree() + k.piece_degree();
  const int nodes = (degree + 2) / 2 + extra_nodes;
  const quad::Rule left = quad::gauss_legendre(nodes, -0.5, 0.0);
  const quad::Rule right = quad::gauss_legendre(nodes, 0.0, 0.5);
  std::vector<double> axis_nodes(left.nodes);
  axis_nodes.insert(axis_nodes.end(), right.nodes.begin(), right.nodes.end());
  std::vector<double> axis_weights(left.weights);
  axis_weights.insert(axis_weights.end(), right.weights.begin(), right.weights.end());
  const std::size_t per_axis = axis_nodes.size();

  std::vector<quad::CompensatedSum> acc(static_cast<std::size_t>(nb * nb));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> z(static_cast<std::size_t>(d));
  std::vector<double> u(s.size());
  bool done = false;
  while (!done) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      z[static_cast<std::size_t>(j)] = axis_nodes[idx[static_cast<std::size_t>(j)]];
      w *= axis_weights[idx[static_cast<std::size_t>(j)]];
    }
    w *= k.value(z);
    monomial_vector_into(z, s, u);
    for (Eigen::Index p = 0; p < nb; ++p) {
      for (Eigen::Index q = p; q < nb; ++q) {
        acc[static_cast<std::size_t>(p * nb + q)].add(w * u[static_cast<std::size_t>(p)] *
                                                      u[static_cast<std::size_t>(q)]);
      }
    }
    // odometer over the tensor grid
    done = true;
    for (int j = 0; j < d; ++j) {
      if (++idx[static_cast<std::size_t>(j)] < per_axis) {
        done = false;
        break;
      }
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }

  Eigen::MatrixXd m(nb, nb);
  for (Eigen::Index p = 0; p < nb; ++p) {
    for (Eigen::Index q = p; q < nb; ++q) {
      bool odd = false;
      for (int j = 0; j < d; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        odd = odd || ((s[static_cast<std::size_t>(p)][jj] + s[static_cast<std::size_t>(q)][jj]) % 2 != 0);
      }
      // Every supported kernel is even in each coordinate.
      const double v = odd ? 0.0 : acc[static_cast<std::size_t>(p * nb + q)].value();
      m(p, q) = v;
      m(q, p) = v;
    }
  }
  return m;
}

double lambda_min(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("lambda_min: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("lambda_min: eigensolver failed");
  const double lam = solver.eigenvalues()(0);
  if (!(lam > 1e-12)) throw std::runtime_error("moment matrix not positive definite");
  return lam;
}

SigmaSeries sigma_constant(double k_inf, int dim) {
  if (!(k_inf > 0.0)) throw std::invalid_argument("sigma_constant: K_inf must be > 0");
  if (dim < 1) throw std::invalid_argument("sigma_constant: dimension must be >= 1");
  constexpr int max_terms = 10000;
  const double pi4 = std::pow(std::numbers::pi, 4);
  const double rate = 1.0 / (8.0 * k_inf * (k_inf + 1.0 / 3.0));
  const double log_d2 = 2.0 * std::log(static_cast<double>(dim));
  quad::CompensatedSum series;
  double previous = 0.0;
  for (int l = 1; l <= max_terms; ++l) {
    const double ten_l = std::pow(10.0, l);
    const double lf = l;
    const double exponent = -18.0 * ten_l / (pi4 * lf * lf * lf * lf) * rate;
    const double log_term = log_d2 + (2.0 * lf - 1.0) * std::numbers::ln10 + exponent;
    const double term = std::isfinite(exponent) ? std::exp(log_term) : 0.0;
    series.add(term);
    const double partial = 2.0 + 2.0 * series.value();
    if (!std::isfinite(partial)) {
      throw std::runtime_error("sigma_constant: series overflowed (pathological K_inf)");
    }
    // 10^l / l^4 only increases from l = 2 on, so once the terms are past
    // their peak and below tolerance the remainder is negligible.
    if (l >= 2 && term <= previous && 2.0 * term < 1e-16 * partial) {
      return {partial, l};
    }
    previous = term;
  }
  throw std::runtime_error("sigma_constant: series did not converge within 10^4 terms");
}

nlohmann::json ProcedureConstants::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < moment_matrix.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < moment_matrix.cols(); ++j) row.push_back(moment_matrix(i, j));
    rows.push_back(row);
  }
  return {{"moment_matrix", rows}, {"lambda", lambda},     {"sigma", sigma},
          {"sigma_terms", sigma_terms}, {"c", c},        {"k_inf", k_inf},
          {"n_b", n_b},                 {"dim", dim}};
}

ProcedureConstants procedure_constants(const KernelSpec& k, const MultiIndexSet& s, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("curvature constant c must be > 0");
  ProcedureConstants pc;
  pc.moment_matrix = moment_matrix(k, s);
  pc.lambda = lambda_min(pc.moment_matrix);
  pc.k_inf = k.sup_norm(s.dim());
  const SigmaSeries sig = sigma_constant(pc.k_inf, s.dim());
  pc.sigma = sig.value;
  pc.sigma_terms = sig.terms;
  pc.c = c;
  pc.n_b = s.size();
  pc.dim = s.dim();
  return pc;
}

namespace {

struct TailParams {
  double scale;     // c lam / (2N)
  double variance;  // denominator of the exponent
};

TailParams tail_params(const ProcedureConstants& pc, double rho_prime_inf, double delta) {
  const double nb = static_cast<double>(pc.n_b);
  const double cl = pc.c * pc.lambda;
  const double rho1 = std::max(1.0, rho_prime_inf);
  return {cl / (2.0 * nb), 8.0 * pc.k_inf * pc.k_inf * rho1 * rho1 +
                               4.0 * delta / (3.0 * nb) * cl * pc.k_inf * rho1};
}

}  // namespace

double cbar_r_integrand(double z, double r, const ProcedureConstants& constants,
                        double rho_prime_inf, double delta) {
  const TailParams tp = tail_params(constants, rho_prime_inf, delta);
  const double u = z * tp.scale - 1.0;
  return r * std::pow(z, r - 1.0) * std::exp(-u * u / tp.variance);
}

double cbar_r(double r, const ProcedureConstants& constants, double rho_prime_inf,
              double delta) {
  if (!(r >= 1.0)) throw std::invalid_argument("cbar_r: r must be >= 1");
  if (!(constants.c > 0.0) || !(constants.lambda > 0.0) || constants.n_b == 0 ||
      !(constants.k_inf > 0.0) || !(rho_prime_inf > 0.0) || !std::isfinite(rho_prime_inf) ||
      !(delta > 0.0)) {
    throw std::invalid_argument("cbar_r: all constants must be positive and finite");
  }
  const TailParams tp = tail_params(constants, rho_prime_inf, delta);
  const double lower = 2.0 / tp.scale;  // 4N / (c lam)
  // Truncate where the integrand drops below exp(-750) relative to its scale.
  double u_max = 1.0 + std::sqrt(tp.variance * 760.0);
  auto log_decay = [&](double u) {
    const double z = (u + 1.0) / tp.scale;
    return u * u / tp.variance - (r - 1.0) * std::log(std::max(z, 1.0));
  };
  while (log_decay(u_max) < 750.0) u_max *= 1.5;
  const double upper = std::max((u_max + 1.0) / tp.scale, 2.0 * lower);
  const double tail = quad::integrate(
      [&](double z) { return cbar_r_integrand(z, r, constants, rho_prime_inf, delta); }, lower,
      upper, 1e-12);
  return std::pow(lower, r) + static_cast<double>(constants.n_b) * constants.sigma * tail;
}

}  // namespace rholpa
