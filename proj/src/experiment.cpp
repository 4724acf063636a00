#include "rholpa/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rholpa/io.hpp"

namespace rholpa {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
  if (!obj.contains(key)) throw ConfigError(join(path, key), "required field is missing");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "must be a number");
  return v.get<double>();
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(path, "must be finite and > 0");
  return x;
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ConfigError(path, "must be a positive integer");
  }
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "must be a string");
  return v.get<std::string>();
}

// Wraps library parse errors with the field path.
template <typename F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

Point point(const json& v, const std::string& path) {
  if (v.is_number()) return {number(v, path)};
  if (!v.is_array() || v.empty()) throw ConfigError(path, "must be a number or non-empty array");
  Point p;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = number(v[i], path + "[" + std::to_string(i) + "]");
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(path + "[" + std::to_string(i) + "]", "must lie in [0,1]");
    p.push_back(x);
  }
  return p;
}

}  // namespace

EstimatorDescriptor estimator_from_json(const json& j, const std::string& path,
                                        const TestFunction* fn, const NoiseModel* noise) {
  if (!j.is_object()) throw ConfigError(path, "must be an object");
  EstimatorDescriptor est;
  est.fit.degree = 1;
  if (j.contains("degree")) {
    const json& b = j.at("degree");
    if (!b.is_number_integer() || b.get<long long>() < 0 || b.get<long long>() > 12) {
      throw ConfigError(join(path, "degree"), "must be an integer in [0,12]");
    }
    est.fit.degree = b.get<int>();
  }
  if (j.contains("M")) {
    est.fit.M = positive(j.at("M"), join(path, "M"));
  } else if (fn != nullptr && fn->bound > 0.0) {
    est.fit.M = fn->bound;
  } else {
    throw ConfigError(join(path, "M"), "required field is missing");
  }
  if (j.contains("kernel")) {
    est.fit.kernel = with_path(join(path, "kernel"), [&] { return KernelSpec::from_json(j.at("kernel")); });
  }
  if (j.contains("contrast")) {
    est.fit.contrast =
        with_path(join(path, "contrast"), [&] { return ContrastSpec::from_json(j.at("contrast")); });
  }
  if (j.contains("optimizer")) {
    est.fit.optimizer = with_path(join(path, "optimizer"),
                                  [&] { return OptimizerSettings::from_json(j.at("optimizer")); });
    LocalFitConfig probe = est.fit;
    probe.x0 = {0.5};
    with_path(join(path, "optimizer"), [&] {
      probe.validate(1);
      return 0;
    });
  }

  if (j.contains("c")) {
    est.c = positive(j.at("c"), join(path, "c"));
  } else if (j.value("c_from_noise", false)) {
    if (noise == nullptr || noise->silent) {
      throw ConfigError(join(path, "c_from_noise"), "needs a noise section with a family");
    }
    if (est.fit.contrast.kind() != ContrastSpec::Kind::huber) {
      throw ConfigError(join(path, "c_from_noise"), "only defined for the Huber contrast");
    }
    est.c = c_gamma(unit_density(noise->family), est.fit.contrast.gamma(), noise->sigma_min);
  }

  const std::string bpath = join(path, "bandwidth");
  const json& bw = require(j, "bandwidth", path);
  const std::string rule = text(require(bw, "rule", bpath), join(bpath, "rule"));
  if (rule == "minimax") {
    est.rule = EstimatorDescriptor::Rule::minimax;
    if (bw.contains("beta")) {
      est.beta = positive(bw.at("beta"), join(bpath, "beta"));
    } else if (fn) {
      est.beta = fn->beta;
    } else {
      throw ConfigError(join(bpath, "beta"), "required field is missing");
    }
    if (bw.contains("L")) {
      est.lipschitz = number(bw.at("L"), join(bpath, "L"));
      if (est.lipschitz < 0.0) throw ConfigError(join(bpath, "L"), "must be >= 0");
    } else if (fn) {
      est.lipschitz = fn->lipschitz;
    } else {
      throw ConfigError(join(bpath, "L"), "required field is missing");
    }
  } else if (rule == "fixed") {
    est.rule = EstimatorDescriptor::Rule::fixed;
    est.h = positive(require(bw, "h", bpath), join(bpath, "h"));
    if (est.h > 1.0) throw ConfigError(join(bpath, "h"), "must be <= 1");
  } else if (rule == "lepski") {
    est.rule = EstimatorDescriptor::Rule::lepski;
    est.r = bw.contains("r") ? number(bw.at("r"), join(bpath, "r")) : 2.0;
    if (est.r < 1.0) throw ConfigError(join(bpath, "r"), "must be >= 1");
    if (!j.contains("c") && !j.value("c_from_noise", false)) {
      throw ConfigError(join(path, "c"), "the lepski rule needs c (or c_from_noise: true)");
    }
    if (!std::isfinite(est.fit.contrast.derivative_bound())) {
      throw ConfigError(join(path, "contrast"), "the lepski rule needs a bounded rho' (not square)");
    }
    if (est.fit.degree < 1) throw ConfigError(join(path, "degree"), "the lepski rule needs degree >= 1");
  } else {
    throw ConfigError(join(bpath, "rule"), "must be one of minimax, fixed, lepski");
  }
  return est;
}

ExperimentConfig ExperimentConfig::from_json(const json& input) {
  const json& j = input.contains("config") && input.contains("config_hash") ? input.at("config") : input;
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.experiment = text(require(j, "experiment", ""), "experiment");
  static const std::vector<std::string> known = {"fit", "adapt", "rates", "tails", "compare"};
  if (std::find(known.begin(), known.end(), cfg.experiment) == known.end()) {
    throw ConfigError("experiment", "must be one of fit, adapt, rates, tails, compare");
  }
  const json& seed = require(j, "seed", "");
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
    throw ConfigError("seed", "must be a non-negative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  const bool from_file = j.contains("data");
  if (from_file) {
    cfg.data_csv = text(require(j.at("data"), "csv", "data"), "data.csv");
    if (cfg.experiment != "fit" && cfg.experiment != "adapt") {
      throw ConfigError("data", "only fit and adapt experiments accept a data file");
    }
  }
  if (j.contains("function") || !from_file) {
    cfg.function = with_path("function", [&] { return test_function_from_json(require(j, "function", "")); });
  }
  if (j.contains("noise") || !from_file) {
    cfg.noise = with_path("noise", [&] { return NoiseModel::from_json(require(j, "noise", "")); });
  }
  const bool have_fn = j.contains("function");
  const bool have_noise = j.contains("noise");
  cfg.estimator = estimator_from_json(require(j, "estimator", ""), "estimator",
                                      have_fn ? &cfg.function : nullptr,
                                      have_noise ? &cfg.noise : nullptr);

  if (!from_file) {
    const json& grid = require(j, "grid", "");
    const json& n = require(grid, "n", "grid");
    if (n.is_array()) {
      for (std::size_t i = 0; i < n.size(); ++i) {
        cfg.n_grid.push_back(count(n[i], "grid.n[" + std::to_string(i) + "]"));
      }
    } else {
      cfg.n_grid.push_back(count(n, "grid.n"));
    }
    if (cfg.n_grid.empty()) throw ConfigError("grid.n", "must not be empty");
    if (cfg.experiment == "rates" && cfg.n_grid.size() < 4) {
      throw ConfigError("grid.n", "rates needs at least 4 sample sizes");
    }
  }

  const json& risk = require(j, "risk", "");
  cfg.x0 = point(require(risk, "x0", "risk"), "risk.x0");
  if (have_fn && cfg.x0.size() != static_cast<std::size_t>(cfg.function.dim)) {
    throw ConfigError("risk.x0", "dimension does not match the function");
  }
  if (risk.contains("r")) {
    cfg.r = number(risk.at("r"), "risk.r");
    if (cfg.r < 1.0) throw ConfigError("risk.r", "must be >= 1");
  }
  if (risk.contains("replications")) cfg.replications = count(risk.at("replications"), "risk.replications");
  if (risk.contains("epsilon")) {
    const json& e = risk.at("epsilon");
    if (!e.is_array() || e.empty()) throw ConfigError("risk.epsilon", "must be a non-empty array");
    for (std::size_t i = 0; i < e.size(); ++i) {
      cfg.epsilon.push_back(positive(e[i], "risk.epsilon[" + std::to_string(i) + "]"));
    }
  } else if (cfg.experiment == "tails") {
    throw ConfigError("risk.epsilon", "required field is missing");
  }
  if (risk.contains("h")) cfg.tail_h = positive(risk.at("h"), "risk.h");
  if (risk.contains("gamma")) cfg.compare_gamma = positive(risk.at("gamma"), "risk.gamma");

  const json& out = require(j, "output", "");
  cfg.output_dir = out.contains("dir") ? text(out.at("dir"), "output.dir") : ".";
  cfg.output_prefix = out.contains("prefix") ? text(out.at("prefix"), "output.prefix") : cfg.experiment;
  return cfg;
}

ProcedureConstants constants_for(const EstimatorDescriptor& est, int dim) {
  return procedure_constants(est.fit.kernel, MultiIndexSet(est.fit.degree, dim), est.c);
}

namespace {

std::vector<std::string> fmt(std::initializer_list<double> values) {
  std::vector<std::string> out;
  for (double v : values) out.push_back(format_double(v));
  return out;
}

Dataset experiment_data(const ExperimentConfig& cfg) {
  if (cfg.data_csv) return read_dataset_csv(*cfg.data_csv);
  return gen_data(cfg.function, cfg.noise, cfg.n_grid.front(), cfg.seed);
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  ExperimentOutput out;
  const fs::path base = fs::path(cfg.output_dir) / cfg.output_prefix;
  out.csv_path = base.string() + ".csv";
  out.result_path = base.string() + ".result.json";
  out.manifest_path = base.string() + ".manifest.json";

  const int dim = cfg.data_csv ? static_cast<int>(cfg.x0.size()) : cfg.function.dim;
  std::ostringstream csv;
  json result;
  json constants;
  // Tiny problems for degree 0 still have a well-defined moment matrix.
  try {
    constants = constants_for(cfg.estimator, dim).to_json();
  } catch (const std::exception& e) {
    constants = {{"error", e.what()}};
  }

  if (cfg.experiment == "fit") {
    const Dataset data = experiment_data(cfg);
    if (data.dim() != dim) throw ConfigError("risk.x0", "dimension does not match the data");
    LocalFitConfig fc = cfg.estimator.fit;
    fc.x0 = cfg.x0;
    fc.h = cfg.estimator.bandwidth(data.size(), dim);
    if (std::isnan(fc.h)) throw ConfigError("estimator.bandwidth.rule", "fit needs minimax or fixed");
    const FitResult fr = fit_local(data, fc);
    std::vector<std::string> header;
    for (int j = 1; j <= dim; ++j) header.push_back("x0_" + std::to_string(j));
    for (const char* c : {"h", "estimate", "n_local", "iterations", "converged", "stationarity_gap",
                          "objective"}) {
      header.emplace_back(c);
    }
    for (Eigen::Index k = 0; k < fr.theta_hat.size(); ++k) header.push_back("theta_" + std::to_string(k));
    csv << csv_row(header) << '\n';
    std::vector<std::string> row;
    for (double v : cfg.x0) row.push_back(format_double(v));
    row.push_back(format_double(fc.h));
    row.push_back(format_double(fr.estimate));
    row.push_back(std::to_string(fr.n_local));
    row.push_back(std::to_string(fr.iterations));
    row.push_back(fr.converged ? "1" : "0");
    row.push_back(format_double(fr.stationarity_gap));
    row.push_back(format_double(fr.objective));
    for (Eigen::Index k = 0; k < fr.theta_hat.size(); ++k) row.push_back(format_double(fr.theta_hat[k]));
    csv << csv_row(row) << '\n';
    result = {{"estimate", fr.estimate}, {"h", fc.h},       {"n_local", fr.n_local},
              {"converged", fr.converged}, {"underdetermined", fr.underdetermined},
              {"iterations", fr.iterations}};
    if (!cfg.data_csv) result["truth"] = cfg.function(cfg.x0);
  } else if (cfg.experiment == "adapt") {
    if (cfg.estimator.rule != EstimatorDescriptor::Rule::lepski) {
      throw ConfigError("estimator.bandwidth.rule", "adapt needs the lepski rule");
    }
    const Dataset data = experiment_data(cfg);
    const BandwidthGrid grid = bandwidth_grid(data.size(), data.dim(), cfg.estimator.fit.degree);
    const LepskiConfig lc = LepskiConfig::from_fit(cfg.estimator.fit, data.dim(), cfg.estimator.c, cfg.estimator.r);
    const SelectionTrace trace = lepski_select(data, cfg.x0, grid, cfg.estimator.fit, lc);
    csv << "k,h,estimate,threshold,n_local,converged,selected\n";
    for (std::size_t k = 0; k < trace.estimates.size(); ++k) {
      auto row = fmt({static_cast<double>(k), trace.bandwidths[k], trace.estimates[k],
                      trace.threshold_constant * s_n(k, data.size(), data.dim(), grid)});
      row.push_back(std::to_string(trace.fits[k].n_local));
      row.push_back(trace.fits[k].converged ? "1" : "0");
      row.push_back(k == trace.chosen_k ? "1" : "0");
      csv << csv_row(row) << '\n';
    }
    result = trace.to_json();
    result["grid"] = grid.to_json();
  } else if (cfg.experiment == "rates") {
    const RiskReport report = risk_curve(cfg.estimator, cfg.function, cfg.x0, cfg.noise, cfg.r,
                                         cfg.n_grid, cfg.replications, cfg.seed);
    const double target = cfg.estimator.rule == EstimatorDescriptor::Rule::minimax
                              ? minimax_exponent(cfg.estimator.beta, dim)
                              : minimax_exponent(cfg.function.beta, dim);
    const RateFit fit = rate_fit(report, target);
    csv << "n,h,risk,std_error,root_risk,max_error,replications,failures\n";
    for (const auto& p : report.points) {
      auto row = fmt({static_cast<double>(p.n), p.h, p.risk, p.std_error, p.root_risk, p.max_error});
      row.push_back(std::to_string(p.replications));
      row.push_back(std::to_string(p.failures));
      csv << csv_row(row) << '\n';
    }
    result = {{"risk_report", report.to_json()}, {"rate_fit", fit.to_json()}};
  } else if (cfg.experiment == "tails") {
    const std::size_t n = cfg.n_grid.front();
    const double h = cfg.tail_h ? *cfg.tail_h
                                : minimax_bandwidth(cfg.function.beta, cfg.function.lipschitz,
                                                    static_cast<double>(n), dim);
    const ProcedureConstants pc = constants_for(cfg.estimator, dim);
    const TailReport report = tail_check(cfg.function, cfg.x0, h, n, cfg.noise, cfg.estimator.fit, pc,
                                         cfg.epsilon, cfg.replications, cfg.seed);
    csv << "epsilon,valid,empirical,wilson_low,wilson_high,bound,informative,violation\n";
    for (const auto& r : report.rows) {
      std::vector<std::string> row = fmt({r.epsilon});
      row.push_back(r.valid ? "1" : "0");
      for (double v : {r.empirical, r.wilson_low, r.wilson_high, r.bound}) row.push_back(format_double(v));
      row.push_back(r.informative ? "1" : "0");
      row.push_back(r.violation ? "1" : "0");
      csv << csv_row(row) << '\n';
    }
    result = report.to_json();
  } else {  // compare
    const std::size_t n = cfg.n_grid.front();
    const double h = cfg.estimator.bandwidth(n, dim);
    if (std::isnan(h)) throw ConfigError("estimator.bandwidth.rule", "compare needs minimax or fixed");
    const auto rows = compare_contrasts(cfg.function, cfg.x0, cfg.noise, n, h, cfg.estimator.fit,
                                        cfg.compare_gamma, cfg.r, cfg.replications, cfg.seed);
    csv << "contrast,n,h,risk,std_error,max_error,failures\n";
    json table = json::array();
    for (const auto& r : rows) {
      std::vector<std::string> row = {r.contrast};
      for (double v : {static_cast<double>(n), h, r.risk.risk, r.risk.std_error, r.risk.max_error}) {
        row.push_back(format_double(v));
      }
      row.push_back(std::to_string(r.risk.failures));
      csv << csv_row(row) << '\n';
      table.push_back({{"contrast", r.contrast}, {"risk", r.risk.risk}, {"std_error", r.risk.std_error}});
    }
    result = {{"table", table}};
  }

  {
    std::ofstream f(out.csv_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.csv_path);
    f << csv.str();
  }
  out.result = result;
  {
    std::ofstream f(out.result_path, std::ios::binary);
    f << result.dump(2) << '\n';
  }
  out.manifest = {{"config", cfg.raw},
                  {"config_hash", fnv1a_hex(cfg.raw.dump())},
                  {"seed", cfg.seed},
                  {"experiment", cfg.experiment},
                  {"estimator", cfg.estimator.to_json()},
                  {"constants", constants},
                  {"version", kVersion},
                  {"outputs", {{"csv", out.csv_path}, {"result", out.result_path}}}};
  if (!cfg.data_csv) {
    out.manifest["function"] = cfg.function.to_json();
    out.manifest["noise"] = cfg.noise.to_json();
  }
  {
    std::ofstream f(out.manifest_path, std::ios::binary);
    f << out.manifest.dump(2) << '\n';
  }
  return out;
}

ExperimentOutput run_experiment(const nlohmann::json& config) {
  return run_experiment(ExperimentConfig::from_json(config));
}

}  // namespace rholpa
