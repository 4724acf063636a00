// Command-line front end for the rho-LPA estimator.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "rholpa/experiment.hpp"
#include "rholpa/io.hpp"

using nlohmann::json;
using namespace rholpa;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// Estimator section from --config (either a whole experiment config or a bare
// estimator object), with command-line overrides applied on top.
json estimator_json(const std::string& config_path, int degree, double M, double gamma,
                    const std::string& kernel) {
  json est = json::object();
  if (!config_path.empty()) {
    const json c = read_json(config_path);
    const json& body = c.contains("config") && c.contains("config_hash") ? c.at("config") : c;
    est = body.contains("estimator") ? body.at("estimator") : body;
  }
  if (degree >= 0) est["degree"] = degree;
  if (M > 0) est["M"] = M;
  if (gamma > 0) est["contrast"] = {{"kind", "huber"}, {"gamma", gamma}};
  if (!kernel.empty()) est["kernel"] = {{"kind", kernel}};
  return est;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rho-LPA: robust local polynomial estimation with adaptive bandwidth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // fit
  std::string data_path, config_path, kernel;
  std::vector<double> x0;
  double h = 0.0, M = -1.0, gamma = -1.0, c = -1.0, r = 2.0;
  int degree = -1;
  auto* fit = app.add_subcommand("fit", "estimate f(x0) at a fixed bandwidth");
  fit->add_option("--data", data_path, "dataset CSV (header x_1..x_d,y)")->required();
  fit->add_option("--x0", x0, "evaluation point")->required()->expected(1, 16);
  fit->set_help_flag("--help", "print this help and exit");
  fit->add_option("--h", h, "bandwidth in (0,1]")->required();
  fit->add_option("--config", config_path, "JSON with an estimator section");
  fit->add_option("--degree", degree, "polynomial degree b");
  fit->add_option("--M", M, "l1 radius of the constraint set");
  fit->add_option("--gamma", gamma, "Huber parameter");
  fit->add_option("--kernel", kernel, "uniform | triangular | epanechnikov");

  // adapt
  auto* adapt = app.add_subcommand("adapt", "estimate f(x0) with the Lepski bandwidth");
  adapt->add_option("--data", data_path, "dataset CSV")->required();
  adapt->add_option("--x0", x0, "evaluation point")->required()->expected(1, 16);
  adapt->add_option("--config", config_path, "JSON with an estimator section");
  adapt->add_option("--degree", degree, "polynomial degree b");
  adapt->add_option("--M", M, "l1 radius of the constraint set");
  adapt->add_option("--gamma", gamma, "Huber parameter");
  adapt->add_option("--kernel", kernel, "uniform | triangular | epanechnikov");
  adapt->add_option("--c", c, "curvature constant c");
  adapt->add_option("--r", r, "risk power r >= 1");

  // simulate
  std::string fn_spec = R"({"name":"sinusoid","beta":2})";
  std::string noise_spec = R"({"family":"gaussian","scale":0.5})";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out_path = "data.csv";
  auto* sim = app.add_subcommand("simulate", "draw a dataset from a test function and noise model");
  sim->add_option("--function", fn_spec, "function JSON, e.g. {\"name\":\"cusp\",\"beta\":0.5}");
  sim->add_option("--noise", noise_spec, "noise JSON, e.g. {\"family\":\"cauchy\",\"scale\":1}");
  sim->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "random seed");
  sim->add_option("--out", out_path, "output CSV (a .json sidecar is written next to it)");

  // experiments driven by a config file
  std::string run_config;
  std::vector<std::pair<std::string, CLI::App*>> runners;
  for (const auto& [name, help] :
       std::vector<std::pair<std::string, std::string>>{
           {"rates", "Monte-Carlo risk over a sample-size grid and fitted log-log slope"},
           {"tails", "empirical deviation probabilities against the exponential bound"},
           {"compare", "risk of square, median-proxy and Huber contrasts"},
           {"run", "any experiment; a manifest.json reruns its recorded config"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", run_config, "experiment JSON or manifest")->required();
    runners.emplace_back(name, sub);
  }

  // constants
  int dim = 1;
  auto* cons = app.add_subcommand("constants", "print lambda, Sigma, N_b, C and C_bar_r");
  cons->add_option("--degree", degree, "polynomial degree b")->required();
  cons->add_option("--dim", dim, "dimension d");
  cons->add_option("--kernel", kernel, "uniform | triangular | epanechnikov");
  cons->add_option("--c", c, "curvature constant c");
  cons->add_option("--gamma", gamma, "Huber parameter (rho'_inf)");
  cons->add_option("--r", r, "risk power r");
  double delta = 1.0;
  cons->add_option("--delta", delta, "radius delta in the C_bar_r integrand");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      json est = estimator_json(config_path, degree, M, gamma, kernel);
      est["bandwidth"] = {{"rule", "fixed"}, {"h", h}};
      const EstimatorDescriptor d = estimator_from_json(est, "estimator", nullptr, nullptr);
      const Dataset data = read_dataset_csv(data_path);
      LocalFitConfig fc = d.fit;
      fc.x0 = x0;
      fc.h = h;
      const FitResult fr = fit_local(data, fc);
      json theta = json::array();
      for (Eigen::Index k = 0; k < fr.theta_hat.size(); ++k) theta.push_back(fr.theta_hat[k]);
      print_json({{"estimate", fr.estimate},
                  {"h", h},
                  {"n_local", fr.n_local},
                  {"iterations", fr.iterations},
                  {"converged", fr.converged},
                  {"underdetermined", fr.underdetermined},
                  {"stationarity_gap", fr.stationarity_gap},
                  {"objective", fr.objective},
                  {"theta", theta}});
    } else if (adapt->parsed()) {
      json est = estimator_json(config_path, degree, M, gamma, kernel);
      if (adapt->count("--c") > 0) {
        if (!(c > 0)) throw std::invalid_argument("--c must be > 0");
        est["c"] = c;
      }
      est["bandwidth"] = {{"rule", "lepski"}, {"r", r}};
      const EstimatorDescriptor d = estimator_from_json(est, "estimator", nullptr, nullptr);
      const Dataset data = read_dataset_csv(data_path);
      if (static_cast<int>(x0.size()) != data.dim()) {
        throw std::runtime_error("--x0 has " + std::to_string(x0.size()) + " coordinates, data has " +
                                 std::to_string(data.dim()));
      }
      const BandwidthGrid grid = bandwidth_grid(data.size(), data.dim(), d.fit.degree);
      const LepskiConfig lc = LepskiConfig::from_fit(d.fit, data.dim(), d.c, d.r);
      const SelectionTrace t = lepski_select(data, x0, grid, d.fit, lc);
      std::printf("k_hat = %zu\nh = %.6g\nestimate = %.10g\nthreshold constant C = %.6g\n\n", t.chosen_k,
                  t.bandwidth(), t.estimate(), t.threshold_constant);
      std::printf("%4s %12s %16s %14s\n", "k", "h_k", "f_k(x0)", "n_local");
      for (std::size_t k = 0; k < t.estimates.size(); ++k) {
        std::printf("%4zu %12.6g %16.10g %14zu%s\n", k, t.bandwidths[k], t.estimates[k], t.fits[k].n_local,
                    k == t.chosen_k ? "  <-" : "");
      }
      std::printf("\n%4s %4s %14s %14s %6s\n", "k", "l", "|f_k - f_l|", "C S_n(l)", "pass");
      for (const auto& chk : t.checks) {
        std::printf("%4zu %4zu %14.6g %14.6g %6s\n", chk.k, chk.l, chk.difference, chk.threshold,
                    chk.passed ? "yes" : "no");
      }
    } else if (sim->parsed()) {
      const TestFunction f = test_function_from_json(json::parse(fn_spec));
      const NoiseModel noise = NoiseModel::from_json(json::parse(noise_spec));
      const Dataset data = gen_data(f, noise, n, seed);
      write_dataset_csv(out_path, data);
      const std::string sidecar = out_path + ".json";
      std::ofstream(sidecar) << json{{"function", f.to_json()},
                                     {"noise", noise.to_json()},
                                     {"n", n},
                                     {"seed", seed},
                                     {"version", kVersion}}
                                    .dump(2)
                             << '\n';
      std::printf("wrote %s (%zu rows) and %s\n", out_path.c_str(), n, sidecar.c_str());
    } else if (cons->parsed()) {
      if (cons->count("--c") > 0 && !(c > 0)) throw std::invalid_argument("--c must be > 0");
      const KernelSpec k = kernel.empty() ? KernelSpec() : KernelSpec::from_json({{"kind", kernel}});
      const double cc = c > 0 ? c : 1.0;
      const ProcedureConstants pc = procedure_constants(k, MultiIndexSet(degree, dim), cc);
      json j = pc.to_json();
      const double rho = gamma > 0 ? gamma : 1.0;
      j["threshold_C"] = threshold_constant(pc.n_b, cc, pc.lambda, pc.k_inf, rho, r, dim);
      j["cbar_r"] = cbar_r(r, pc, rho, delta);
      print_json(j);
    } else {
      for (const auto& [name, sub] : runners) {
        if (!sub->parsed()) continue;
        ExperimentConfig cfg = ExperimentConfig::from_json(read_json(run_config));
        if (name != "run" && cfg.experiment != name) {
          throw ConfigError("experiment", "is '" + cfg.experiment + "' but the subcommand is " + name);
        }
        const ExperimentOutput out = run_experiment(cfg);
        print_json(out.result);
        std::fprintf(stderr, "wrote %s, %s, %s\n", out.csv_path.c_str(), out.result_path.c_str(),
                     out.manifest_path.c_str());
      }
    }
  } catch (const EmptyGrid& e) {
    std::fprintf(stderr, "error: %s (need n >= %zu)\n", e.what(), e.minimal_n);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
