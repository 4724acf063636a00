#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rholpa/simulate.hpp"

using namespace rholpa;

namespace {

double quantile_of(std::vector<double> v, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

NoiseModel noise(NoiseFamily f, double scale) {
  NoiseModel m;
  m.family = f;
  m.sigma_min = scale;
  return m;
}

}  // namespace

TEST_CASE("design: determinism, range and mean") {
  const auto a = gen_design(100000, 2, 9);
  CHECK(a == gen_design(100000, 2, 9));
  CHECK(a != gen_design(100000, 2, 10));
  for (double v : a) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (int j = 0; j < 2; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 100000; ++i) s += a[2 * i + static_cast<std::size_t>(j)];
    CHECK(std::abs(s / 100000 - 0.5) <= 4.0 / std::sqrt(100000.0));
  }
}

TEST_CASE("noise: median, antithetic symmetry and Cauchy IQR") {
  const std::size_t n = 100000;
  for (const auto fam : {NoiseFamily::gaussian, NoiseFamily::laplace, NoiseFamily::cauchy}) {
    for (double scale : {0.5, 2.0}) {
      const auto m = noise(fam, scale);
      const auto e = gen_noise(m, n, 17);
      CHECK(std::abs(quantile_of(e, 0.5)) <= 4.0 * (1.2 / std::sqrt(double(n))) * scale);
      const auto flipped = gen_noise(m, n, 17, true);
      for (std::size_t i = 0; i < n; ++i) CHECK(flipped[i] == -e[i]);
    }
  }
  const auto c = gen_noise(noise(NoiseFamily::cauchy, 1.5), n, 23);
  const double iqr = quantile_of(c, 0.75) - quantile_of(c, 0.25);
  CHECK(std::abs(iqr - 2.0 * 1.5) <= 0.05 * 2.0 * 1.5);
}

TEST_CASE("noise: quantiles are odd and match the CDF") {
  for (const auto fam : {NoiseFamily::gaussian, NoiseFamily::laplace, NoiseFamily::cauchy}) {
    const auto g = unit_density(fam);
    // dyadic u so that 1 - u is exact
    for (double u : {std::ldexp(1.0, -20), 0.0078125, 0.1875, 0.5 - std::ldexp(1.0, -30), 0.5}) {
      CHECK(unit_quantile(fam, 1.0 - u) == -unit_quantile(fam, u));
      CHECK((*g.cdf)(unit_quantile(fam, u)) == doctest::Approx(u).epsilon(1e-10));
    }
    CHECK(certify_symmetric_unimodal(g, 30.0, 3000));
  }
  CHECK(unit_quantile(NoiseFamily::cauchy, 0.75) == doctest::Approx(1.0));
}

TEST_CASE("heteroscedastic scales stay above sigma_min") {
  for (const auto pat : {ScalePattern::constant, ScalePattern::alternating, ScalePattern::sinusoidal}) {
    NoiseModel m;
    m.sigma_min = 0.3;
    m.pattern = pat;
    m.ratio = 4.0;
    m.period = 7.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
      CHECK(m.scale(i) >= 0.3);
      hi = std::max(hi, m.scale(i));
    }
    if (pat != ScalePattern::constant) CHECK(hi > 0.3);
    CHECK(NoiseModel::from_json(m.to_json()).to_json() == m.to_json());
  }
  CHECK_THROWS(NoiseModel::from_json({{"family", "gaussian"}, {"scale", 0.0}}));
  CHECK_THROWS(NoiseModel::from_json({{"family", "student"}}));
}

TEST_CASE("gen_data composes design, function and noise") {
  const auto f = sinusoid(2.0);
  const auto quiet = gen_data(f, NoiseModel::none(), 1000, 3);
  for (std::size_t i = 0; i < quiet.size(); ++i) CHECK(quiet.y(i) == f(quiet.x(i)));

  const auto m = noise(NoiseFamily::laplace, 0.7);
  const auto zero = constant_function(0.0, 1);
  const auto pure = gen_data(zero, m, 1000, 3);
  const auto e = gen_noise(m, 1000, 3);
  for (std::size_t i = 0; i < pure.size(); ++i) CHECK(pure.y(i) == e[i]);

  const auto a = gen_data(f, m, 500, 8);
  const auto b = gen_data(f, m, 500, 8);
  CHECK(a.xs() == b.xs());
  CHECK(a.ys() == b.ys());
  // design does not depend on the noise model
  CHECK(a.xs() == gen_data(f, NoiseModel::none(), 500, 8).xs());
}

TEST_CASE("gen_data: Y regressed on f(X) has slope 1") {
  const auto f = sinusoid(2.0);
  const auto d = gen_data(f, noise(NoiseFamily::gaussian, 0.5), 100000, 31);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double fx = f(d.x(i));
    sx += fx;
    sy += d.y(i);
    sxx += fx * fx;
    sxy += fx * d.y(i);
  }
  const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
  CHECK(std::abs(slope - 1.0) <= 0.02);
}

TEST_CASE("test functions: declared constants") {
  const auto s = sinusoid(2.0);
  CHECK(s.beta == 2.0);
  CHECK(s.lipschitz == doctest::Approx(4.0 * std::numbers::pi * std::numbers::pi));
  CHECK(s.bound == doctest::Approx(1.0 + 2.0 * std::numbers::pi + 4.0 * std::numbers::pi * std::numbers::pi));
  CHECK(floor_strict(2.0) == 1);
  CHECK(floor_strict(2.5) == 2);
  CHECK(floor_strict(0.5) == 0);

  const auto k = constant_function(-0.75, 2);
  CHECK(k.lipschitz == 0.0);
  CHECK(k.bound == 0.75);
  const Point p{0.2, 0.9};
  CHECK(k(p) == -0.75);

  const auto c = cusp(0.5, {0.5});
  CHECK(c.lipschitz == 1.0);
  CHECK_FALSE(c.derivative({1}, Point{0.3}).has_value());
  CHECK_THROWS(cusp(1.5, {0.5}));
}

TEST_CASE("every library function passes its Hoelder certificate") {
  for (const auto& f : test_function_library()) {
    const auto cert = certify_holder(f, 10000, 99);
    INFO(f.name << " beta=" << f.beta);
    CHECK(cert.holder_ok);
    CHECK(cert.bound_ok);
    CHECK(cert.worst_ratio <= 1.0 + 1e-9);
    // round trip through the config form
    const auto g = test_function_from_json(f.to_json());
    CHECK(g.to_json() == f.to_json());
  }
  const auto poly = polynomial(MultiIndexSet(2, 2), {1.0, -0.5, 0.25, 0.1, 0.2, -0.3}, {0.4, 0.6});
  CHECK(certify_holder(poly, 2000, 1).ok());
  CHECK(test_function_from_json(poly.to_json()).to_json() == poly.to_json());
}

TEST_CASE("cusp certificate with beta = 1/2 and L = 1 over 10^4 pairs") {
  const auto c = cusp(0.5, {0.5}, 1.0);
  const auto cert = certify_holder(c, 10000, 4);
  CHECK(cert.holder_ok);
  CHECK(cert.worst_ratio > 0.5);  // the certificate actually probes near the limit
}

TEST_CASE("dataset validation") {
  Dataset d(1);
  const Point ok{0.5};
  d.push_back(ok, 1.0);
  const Point bad{1.5};
  CHECK_THROWS(d.push_back(bad, 1.0));
  CHECK_THROWS(d.push_back(ok, std::nan("")));
  CHECK(d.size() == 1);
}
