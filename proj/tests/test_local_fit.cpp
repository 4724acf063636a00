#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rholpa/local_fit.hpp"
#include "rholpa/random.hpp"
#include "rholpa/simulate.hpp"

using namespace rholpa;

namespace {

LocalFitConfig config(Point x0, double h, int degree, double M, ContrastSpec c = ContrastSpec::huber(1.0)) {
  LocalFitConfig cfg;
  cfg.x0 = std::move(x0);
  cfg.h = h;
  cfg.degree = degree;
  cfg.M = M;
  cfg.contrast = c;
  return cfg;
}

Dataset noisy_sine(Xoshiro256& rng, std::size_t n, int d, double noise) {
  Dataset data(d);
  Point x(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform();
    data.push_back(x, std::sin(6.0 * x[0]) + noise * (rng.uniform() - 0.5));
  }
  return data;
}

// Projection onto the l1 ball by bisection on the soft threshold.
Eigen::VectorXd kkt_projection(const Eigen::VectorXd& t, double radius) {
  if (t.lpNorm<1>() <= radius) return t;
  double lo = 0.0, hi = t.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double norm = (t.cwiseAbs().array() - mid).max(0.0).sum();
    (norm > radius ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);
  Eigen::VectorXd w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) w[i] = std::copysign(std::max(std::abs(t[i]) - tau, 0.0), t[i]);
  return w;
}

}  // namespace

TEST_CASE("criterion: empty window, exact fit and a hand-computed sum") {
  Dataset data(1);
  data.push_back(Point{0.9}, 4.0);
  Eigen::VectorXd t(2);
  t << 1.0, 0.5;
  CHECK(criterion(t, data, config({0.2}, 0.1, 1, 10.0)) == 0.0);

  Dataset one(1);
  one.push_back(Point{0.4}, 1.0);
  CHECK(criterion(t, one, config({0.4}, 0.1, 1, 10.0)) == 0.0);

  Dataset four(1);
  four.push_back(Point{0.45}, 0.9);
  four.push_back(Point{0.5}, 1.3);
  four.push_back(Point{0.58}, 3.0);
  four.push_back(Point{0.7}, 5.0);  // outside the window
  // residuals 0.025, 0.3, 1.8 -> 0.0003125 + 0.045 + 1.3, divided by n h = 0.8
  CHECK(criterion(t, four, config({0.5}, 0.2, 1, 10.0)) == doctest::Approx(1.681640625).epsilon(1e-14));
}

TEST_CASE("gradient: zero at the truth and for cancelling residuals") {
  Dataset exact(1);
  for (double x : {0.3, 0.35, 0.4, 0.45, 0.5}) exact.push_back(Point{x}, 2.0 + 3.0 * (x - 0.4) / 0.2);
  Eigen::VectorXd truth(2);
  truth << 2.0, 3.0;
  const auto g = criterion_gradient(truth, exact, config({0.4}, 0.2, 1, 10.0));
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);

  // residuals +0.3 and -0.3 at mirrored points cancel every odd and even moment
  Dataset sym(1);
  sym.push_back(Point{0.45}, 1.3);
  sym.push_back(Point{0.45}, 0.7);
  sym.push_back(Point{0.55}, 1.3);
  sym.push_back(Point{0.55}, 0.7);
  Eigen::VectorXd one(3);
  one << 1.0, 0.0, 0.0;
  const auto gs = criterion_gradient(one, sym, config({0.5}, 0.2, 2, 10.0));
  CHECK(gs.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gradient matches central differences on random configurations") {
  Xoshiro256 rng(101, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int b = static_cast<int>(rng() % 4);
    auto data = noisy_sine(rng, 200, d, 3.0);
    Point x0(static_cast<std::size_t>(d));
    for (auto& v : x0) v = 0.2 + 0.6 * rng.uniform();
    const double h = 0.3 + 0.5 * rng.uniform();
    const auto kernel = static_cast<KernelSpec::Kind>(rng() % 3);
    auto cfg = config(x0, h, b, 50.0, ContrastSpec::huber(0.2 + rng.uniform()));
    cfg.kernel = KernelSpec(kernel);
    const LocalCriterion crit(data, cfg);
    Eigen::VectorXd t(static_cast<Eigen::Index>(crit.basis_size()));
    for (Eigen::Index k = 0; k < t.size(); ++k) t[k] = 2.0 * rng.uniform() - 1.0;
    const auto g = crit.gradient(t);
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      const double step = 1e-6 * (1.0 + std::abs(t[k]));
      Eigen::VectorXd up = t, down = t;
      up[k] += step;
      down[k] -= step;
      const double fd = (crit.value(up) - crit.value(down)) / (2.0 * step);
      const double scale = std::max(std::abs(g[k]), 1e-3 * g.cwiseAbs().maxCoeff());
      CHECK(std::abs(fd - g[k]) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("criterion is convex") {
  Xoshiro256 rng(7, 0);
  for (int rep = 0; rep < 50; ++rep) {
    auto data = noisy_sine(rng, 150, 1, 4.0);
    const auto cfg = config({0.5}, 0.6, 2, 20.0, ContrastSpec::huber(0.5));
    const LocalCriterion crit(data, cfg);
    Eigen::VectorXd a = Eigen::VectorXd::Random(3) * 3.0, b = Eigen::VectorXd::Random(3) * 3.0;
    const double lam = rng.uniform();
    CHECK(crit.value(lam * a + (1.0 - lam) * b) <= lam * crit.value(a) + (1.0 - lam) * crit.value(b) + 1e-12);
  }
}

TEST_CASE("l1 projection") {
  Eigen::VectorXd inside(3);
  inside << 0.2, -0.3, 0.1;
  CHECK(project_l1_ball(inside, 1.0) == inside);
  Eigen::VectorXd axis(2);
  axis << 2.0, 0.0;
  CHECK(project_l1_ball(axis, 1.0) == Eigen::Vector2d(1.0, 0.0));
  Eigen::VectorXd diag(2);
  diag << 1.0, 1.0;
  CHECK((project_l1_ball(diag, 1.0) - Eigen::Vector2d(0.5, 0.5)).norm() < 1e-15);
  CHECK_THROWS(project_l1_ball(diag, 0.0));

  Xoshiro256 rng(8, 0);
  for (int rep = 0; rep < 500; ++rep) {
    const auto n = static_cast<Eigen::Index>(1 + rng() % 10);
    Eigen::VectorXd t(n);
    for (Eigen::Index k = 0; k < n; ++k) t[k] = 10.0 * (rng.uniform() - 0.5);
    const double radius = 0.1 + 5.0 * rng.uniform();
    const auto p = project_l1_ball(t, radius);
    CHECK(p.lpNorm<1>() <= radius);
    CHECK((p - kkt_projection(t, radius)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("exact recovery of noiseless polynomials") {
  Xoshiro256 rng(55, 0);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int b = static_cast<int>(rng() % 4);
    const MultiIndexSet s(b, d);
    Point x0(static_cast<std::size_t>(d));
    for (auto& v : x0) v = 0.3 + 0.4 * rng.uniform();
    const double h = 0.3;
    Eigen::VectorXd theta(static_cast<Eigen::Index>(s.size()));
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] = 2.0 * rng.uniform() - 1.0;
    Dataset data(d);
    Point x(static_cast<std::size_t>(d));
    for (int i = 0; i < 400; ++i) {
      for (auto& v : x) v = rng.uniform();
      data.push_back(x, local_polynomial_eval(theta, x, x0, h, s));
    }
    auto cfg = config(x0, h, b, theta.lpNorm<1>() + 1.0);
    cfg.optimizer.gradient_tolerance = 1e-12;
    cfg.optimizer.max_iterations = 100000;
    const auto fit = fit_local(data, cfg);
    CHECK((fit.theta_hat - theta).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(fit.estimate == fit.theta_hat[0]);
    CHECK_FALSE(fit.underdetermined);
  }
}

TEST_CASE("b = 0: large gamma gives the clipped local mean, tiny gamma the median") {
  Xoshiro256 rng(9, 0);
  for (int rep = 0; rep < 40; ++rep) {
    Dataset data(1);
    std::vector<double> local;
    for (int i = 0; i < 30; ++i) {
      const double x = rng.uniform();
      const double y = 4.0 * (rng.uniform() - 0.5) + (rng() % 5 == 0 ? 20.0 : 0.0);
      data.push_back(Point{x}, y);
      if (std::abs(x - 0.5) <= 0.2) local.push_back(y);
    }
    if (local.empty()) continue;
    double mean = 0.0;
    for (double y : local) mean += y;
    mean /= static_cast<double>(local.size());
    const double M = 3.0;
    auto wide = config({0.5}, 0.4, 0, M, ContrastSpec::huber(1e4));
    CHECK(std::abs(estimate_at(data, wide) - std::clamp(mean, -M, M)) < 1e-6);

    auto tight = config({0.5}, 0.4, 0, 100.0, ContrastSpec::huber(1e-6 * 4.0));
    std::sort(local.begin(), local.end());
    const std::size_t m = local.size();
    const double lo = local[(m - 1) / 2], hi = local[m / 2];
    const double est = estimate_at(data, tight);
    CHECK(est >= lo - 1e-3);
    CHECK(est <= hi + 1e-3);
  }
}

TEST_CASE("fit_local: bookkeeping and errors") {
  Xoshiro256 rng(3, 0);
  auto data = noisy_sine(rng, 300, 1, 1.0);
  const auto cfg = config({0.5}, 0.2, 2, 0.5);
  const auto fit = fit_local(data, cfg);
  const double l1 = fit.theta_hat.lpNorm<1>();
  CHECK(l1 <= 0.5);
  CHECK(std::abs(fit.estimate) <= 0.5);
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) count += std::abs(data.x(i)[0] - 0.5) <= 0.1;
  CHECK(fit.n_local == count);

  Dataset lonely(1);
  lonely.push_back(Point{0.9}, 1.0);
  CHECK_THROWS_AS(fit_local(lonely, config({0.1}, 0.1, 1, 1.0)), EmptyNeighborhood);
  CHECK_THROWS_AS(fit_local(data, config({0.5}, 0.2, 1, 1.0, ContrastSpec::absolute())), std::invalid_argument);
  CHECK_THROWS(fit_local(data, config({0.5}, 1.5, 1, 1.0)));
  CHECK_THROWS(fit_local(data, config({0.5}, 0.2, 1, 0.0)));
  CHECK_THROWS(fit_local(data, config({0.5, 0.5}, 0.2, 1, 1.0)));

  Dataset few(1);
  few.push_back(Point{0.5}, 1.0);
  few.push_back(Point{0.52}, 1.1);
  const auto under = fit_local(few, config({0.5}, 0.2, 3, 10.0));
  CHECK(under.underdetermined);

  Dataset constant(1);
  for (int i = 0; i < 50; ++i) constant.push_back(Point{rng.uniform()}, 0.7);
  CHECK(std::abs(estimate_at(constant, config({0.5}, 0.3, 2, 5.0)) - 0.7) < 1e-6);
}

TEST_CASE("optimizer: monotone descent") {
  Xoshiro256 rng(12, 0);
  for (int rep = 0; rep < 20; ++rep) {
    auto data = noisy_sine(rng, 400, 1, 6.0);
    auto cfg = config({0.4}, 0.4, 3, 30.0);
    cfg.optimizer.record_trace = true;
    const auto fit = fit_local(data, cfg);
    REQUIRE(fit.objective_trace.size() >= 1);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
      CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1]);
    }
    CHECK(fit.converged);
    CHECK(fit.stationarity_gap <= cfg.optimizer.gradient_tolerance);
  }
}

TEST_CASE("shift equivariance and sign symmetry") {
  Xoshiro256 rng(13, 0);
  for (int rep = 0; rep < 20; ++rep) {
    auto data = noisy_sine(rng, 300, 1, 2.0);
    auto cfg = config({0.3 + 0.4 * rng.uniform()}, 0.3, static_cast<int>(rng() % 3), 1e3);
    cfg.optimizer.gradient_tolerance = 1e-12;
    const double a = 2.5;
    Dataset shifted(1), negated(1);
    for (std::size_t i = 0; i < data.size(); ++i) {
      shifted.push_back(data.x(i), data.y(i) + a);
      negated.push_back(data.x(i), -data.y(i));
    }
    const double base = estimate_at(data, cfg);
    CHECK(std::abs(estimate_at(shifted, cfg) - (base + a)) < 1e-7);
    CHECK(std::abs(estimate_at(negated, cfg) + base) < 1e-7);
  }
}

TEST_CASE("bounded influence of a single outlier") {
  Xoshiro256 rng(14, 0);
  auto data = noisy_sine(rng, 400, 1, 0.5);
  auto cfg = config({0.5}, 0.3, 1, 50.0, ContrastSpec::huber(1.0));
  cfg.optimizer.gradient_tolerance = 1e-12;
  std::size_t victim = 0;
  while (std::abs(data.x(victim)[0] - 0.5) > 0.05) ++victim;
  auto with_outlier = [&](double size) {
    Dataset d(1);
    for (std::size_t i = 0; i < data.size(); ++i) d.push_back(data.x(i), data.y(i) + (i == victim ? size : 0.0));
    return estimate_at(d, cfg);
  };
  const double base = estimate_at(data, cfg);
  const double saturated = with_outlier(10.0) - base;  // residual already beyond gamma
  const double huge = with_outlier(1e6) - base;
  CHECK(std::abs(huge - saturated) < 1e-7);
  CHECK(std::abs(huge) < 0.1);
  auto ls = cfg;
  ls.contrast = ContrastSpec::square();
  ls.M = 1e7;
  Dataset d(1);
  for (std::size_t i = 0; i < data.size(); ++i) d.push_back(data.x(i), data.y(i) + (i == victim ? 1e6 : 0.0));
  CHECK(std::abs(estimate_at(d, ls) - estimate_at(data, ls)) > 1e3);
}

TEST_CASE("optimizer settings round-trip and validation") {
  OptimizerSettings s;
  s.max_iterations = 77;
  s.gradient_tolerance = 1e-9;
  const auto t = OptimizerSettings::from_json(s.to_json());
  CHECK(t.max_iterations == 77);
  CHECK(t.gradient_tolerance == 1e-9);
  auto cfg = config({0.5}, 0.2, 1, 1.0);
  cfg.optimizer.backtracking = 1.0;
  CHECK_THROWS(cfg.validate(1));
  cfg.optimizer.backtracking = 0.5;
  cfg.optimizer.gradient_tolerance = 0.0;
  CHECK_THROWS(cfg.validate(1));
}
