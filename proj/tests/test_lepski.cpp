#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rholpa/lepski.hpp"
#include "rholpa/random.hpp"
#include "rholpa/simulate.hpp"

using namespace rholpa;

TEST_CASE("minimax bandwidth") {
  for (double n : {10.0, 1e3, 1e6}) {
    CHECK(minimax_bandwidth(2.0, 1.0, n, 1) == doctest::Approx(std::pow(n, -1.0 / 5.0)));
  }
  CHECK(minimax_bandwidth(1.0, 1.0, 1024, 1) == doctest::Approx(std::pow(2.0, -10.0 / 3.0)).epsilon(1e-14));
  CHECK(std::abs(minimax_bandwidth(1.0, 1.0, 1024, 1) - 0.0992) < 5e-5);
  double prev = 1.0;
  for (double n = 100; n < 1e7; n *= 3) {
    const double h = minimax_bandwidth(2.0, 3.0, n, 2);
    CHECK(h < prev);
    CHECK(minimax_bandwidth(3.0, 3.0, n, 2) > h);
    prev = h;
  }
  CHECK(minimax_bandwidth(2.0, 0.0, 100, 1) == 1.0);   // L = 0 clamps
  CHECK(minimax_bandwidth(2.0, 1e-3, 10, 1) == 1.0);
}

TEST_CASE("adaptive normalisation at beta = b equals the minimax rate") {
  for (int b = 1; b <= 4; ++b) {
    for (int d = 1; d <= 3; ++d) {
      for (double n : {100.0, 1e4, 1e6}) {
        CHECK(adaptation_price(b, b, n, d) == 1.0);
        CHECK(adaptive_rate(b, b, n, d) == minimax_rate(b, n, d));
        CHECK(adaptive_rate(0.5 * b, b, n, d) > minimax_rate(0.5 * b, n, d));
      }
    }
  }
}

TEST_CASE("bandwidth grid") {
  const auto g = bandwidth_grid(10000, 1, 2);
  CHECK(g.h_max == doctest::Approx(std::pow(10.0, -0.8)).epsilon(1e-14));
  CHECK(std::abs(g.h_max - 0.1585) < 1e-4);
  CHECK(g.h_min == doctest::Approx(std::pow(std::log(1e4), 2) / 1e4).epsilon(1e-14));
  CHECK(std::abs(g.h_min - 0.00848) < 1e-5);
  CHECK(g.k_n() == 4);
  CHECK(g.h[0] == g.h_max);
  for (std::size_t k = 0; k < g.h.size(); ++k) {
    CHECK(g.h[k] >= g.h_min);
    CHECK(g.h[k] == std::ldexp(g.h_max, -static_cast<int>(k)));
  }
  CHECK(g.h_max / 32.0 < g.h_min);

  for (int d = 1; d <= 3; ++d) {
    for (int b = 1; b <= 3; ++b) {
      try {
        bandwidth_grid(3, d, b);
      } catch (const EmptyGrid& e) {
        // the reported size is the first one that works
        CHECK_NOTHROW(bandwidth_grid(e.minimal_n, d, b));
        CHECK_THROWS_AS(bandwidth_grid(e.minimal_n - 1, d, b), EmptyGrid);
      }
    }
  }
  CHECK_THROWS(bandwidth_grid(2, 1, 1));
  CHECK_THROWS(bandwidth_grid(1000, 1, 0));
}

TEST_CASE("S_n") {
  const auto g = bandwidth_grid(10000, 1, 2);
  CHECK(s_n(0, 10000, 1, g) == doctest::Approx(std::sqrt(1.0 / (1e4 * g.h_max))).epsilon(1e-15));
  for (std::size_t l = 0; l + 1 <= g.k_n(); ++l) CHECK(s_n(l + 1, 10000, 1, g) > s_n(l, 10000, 1, g));
  // l = 2: h_2 = h_max / 4
  const double want = std::sqrt((1.0 + 2.0 * std::log(2.0)) / (1e4 * g.h_max / 4.0));
  CHECK(s_n(2, 10000, 1, g) == doctest::Approx(want).epsilon(1e-15));
  CHECK(std::abs(s_n(2, 10000, 1, g) - 0.0776) < 1e-4);
  CHECK_THROWS(s_n(5, 10000, 1, g));
}

TEST_CASE("threshold constant") {
  CHECK(threshold_constant(1, 1.0, 1.0, 1.0, 1.0, 1.0, 1) == 12.0);
  const double base = threshold_constant(3, 0.6, 0.02, 1.5, 2.0, 2.0, 2);
  CHECK(threshold_constant(6, 0.6, 0.02, 1.5, 2.0, 2.0, 2) == doctest::Approx(2.0 * base).epsilon(1e-15));
  CHECK(base == doctest::Approx(4.0 * 3 / (0.6 * 0.02) * (1.0 + 2.0 * 1.5 * 2.0 * 2.0)).epsilon(1e-15));
  CHECK_THROWS(threshold_constant(1, 1.0, 1.0, 1.0, std::numeric_limits<double>::infinity(), 1.0, 1));
  CHECK_THROWS(threshold_constant(1, 0.0, 1.0, 1.0, 1.0, 1.0, 1));

  const auto g = unit_density(NoiseFamily::laplace);
  for (double gamma : {0.3, 1.0, 2.0}) {
    const double sigma = 0.8;
    const double c = c_gamma(g, gamma, sigma);
    const double half = 0.5 * c;
    CHECK(threshold_constant_huber(4, half, 3.5e-4, 1.0, gamma, 2.0, 1) ==
          doctest::Approx(threshold_constant(4, c, 3.5e-4, 1.0, gamma, 2.0, 1)).epsilon(1e-14));
  }
}

TEST_CASE("lepski config") {
  LocalFitConfig fit;
  fit.degree = 2;
  fit.M = 10.0;
  const auto lc = LepskiConfig::from_fit(fit, 1, 0.5, 2.0);
  CHECK(lc.n_b == 3);
  CHECK(lc.k_inf == 1.0);
  CHECK(lc.rho_prime_inf == 1.0);
  CHECK(lc.threshold() == threshold_constant(3, 0.5, lc.lambda, 1.0, 1.0, 2.0, 1));
  fit.contrast = ContrastSpec::square();
  CHECK_THROWS(LepskiConfig::from_fit(fit, 1, 0.5, 2.0));
  LepskiConfig bad = lc;
  bad.r = 0.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("selection rule on synthetic estimates") {
  std::vector<PairwiseCheck> checks;
  CHECK(select_index({0.0, 0.0, 10.0}, {0.0, 1.0, 1.0}, &checks) == 2);
  // k = 0 fails against l = 2, k = 1 fails against l = 2
  bool saw_fail_0_2 = false, saw_fail_1_2 = false;
  for (const auto& c : checks) {
    if (c.k == 0 && c.l == 2) saw_fail_0_2 = !c.passed;
    if (c.k == 1 && c.l == 2) saw_fail_1_2 = !c.passed;
  }
  CHECK(saw_fail_0_2);
  CHECK(saw_fail_1_2);

  CHECK(select_index({1.5, 1.5, 1.5, 1.5}, {0.0, 1e-9, 1e-9, 1e-9}) == 0);
  CHECK(select_index({4.0}, {1.0}) == 0);
  CHECK(select_index({0.0, 5.0, 5.2}, {0.0, 1.0, 1.0}) == 1);
  // only strictly finer indices are compared
  CHECK(select_index({0.0, 0.5, 100.0, 100.0}, {9.0, 1.0, 1.0, 1.0}) == 2);
}

TEST_CASE("lepski on data: constant response picks the largest bandwidth") {
  const auto f = constant_function(0.4, 1);
  const auto data = gen_data(f, NoiseModel::none(), 2000, 1);
  LocalFitConfig fit;
  fit.degree = 2;
  fit.M = 5.0;
  const auto grid = bandwidth_grid(data.size(), 1, 2);
  const auto trace = lepski_select(data, {0.5}, grid, fit, LepskiConfig::from_fit(fit, 1, 0.5, 2.0));
  CHECK(trace.chosen_k == 0);
  CHECK(trace.estimate() == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(trace.estimates.size() == grid.h.size());
}

TEST_CASE("lepski trace replays consistently") {
  NoiseModel noise;
  noise.family = NoiseFamily::cauchy;
  noise.sigma_min = 0.5;
  const auto f = sinusoid(2.0);
  LocalFitConfig fit;
  fit.degree = 2;
  fit.M = f.bound;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = gen_data(f, noise, 3000, seed);
    const auto grid = bandwidth_grid(data.size(), 1, 2);
    // a deliberately small c so that checks can fail
    auto lc = LepskiConfig::from_fit(fit, 1, 1.0, 2.0);
    lc.c = 1e6;
    const auto trace = lepski_select(data, {0.3}, grid, fit, lc);
    CHECK(trace.estimate() == trace.estimates[trace.chosen_k]);
    CHECK(trace.bandwidth() == grid.h[trace.chosen_k]);
    std::vector<double> thresholds;
    for (std::size_t l = 0; l < grid.h.size(); ++l) thresholds.push_back(trace.threshold_constant * s_n(l, data.size(), 1, grid));
    CHECK(select_index(trace.estimates, thresholds) == trace.chosen_k);
    for (const auto& c : trace.checks) {
      CHECK(c.l > c.k);
      CHECK(c.difference == std::abs(trace.estimates[c.k] - trace.estimates[c.l]));
      CHECK(c.threshold == thresholds[c.l]);
      CHECK(c.passed == (c.difference <= c.threshold));
      if (c.k == trace.chosen_k) CHECK(c.passed);
    }
    // every smaller k has at least one recorded failure
    for (std::size_t k = 0; k < trace.chosen_k; ++k) {
      bool failed = false;
      for (const auto& c : trace.checks) failed |= c.k == k && !c.passed;
      CHECK(failed);
    }
    const auto j = trace.to_json();
    CHECK(j.at("chosen_k").get<std::size_t>() == trace.chosen_k);
  }
}

TEST_CASE("grid construction ignores anything below h_min") {
  // The grid is a pure function of (n, d, b); a finer h never appears.
  for (std::size_t n : {500u, 5000u, 50000u}) {
    const auto g = bandwidth_grid(n, 1, 3);
    CHECK(g.h.back() >= g.h_min);
    CHECK(g.h.back() / 2.0 < g.h_min);
    const auto again = bandwidth_grid(n, 1, 3);
    CHECK(again.h == g.h);
  }
}
