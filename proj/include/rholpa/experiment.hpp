#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rholpa/harness.hpp"

namespace rholpa {

inline constexpr const char* kVersion = "0.3.0";

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path(path) {}
  std::string path;
};

/// Parsed and validated experiment configuration.
///
/// Sections: function, noise, estimator, grid, risk, output. A manifest
/// written by run_experiment is accepted too (its "config" member is used).
struct ExperimentConfig {
  std::string experiment;  // fit | adapt | rates | tails | compare
  std::uint64_t seed = 0;
  TestFunction function;
  NoiseModel noise;
  EstimatorDescriptor estimator;
  std::vector<std::size_t> n_grid;
  double r = 2.0;
  std::size_t replications = 200;
  Point x0;
  std::vector<double> epsilon;       // tails
  std::optional<double> tail_h;      // tails; defaults to the minimax bandwidth
  double compare_gamma = 1.0;        // compare
  std::optional<std::string> data_csv;  // fit / adapt on a file instead of simulated data
  std::string output_dir = ".";
  std::string output_prefix;
  nlohmann::json raw;                // the config as given

  static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Parses the "estimator" section. `fn` supplies defaults for M and the
/// minimax (beta, L); `noise` feeds c_from_noise.
EstimatorDescriptor estimator_from_json(const nlohmann::json& j, const std::string& path,
                                        const TestFunction* fn, const NoiseModel* noise);

struct ExperimentOutput {
  std::string csv_path;
  std::string result_path;
  std::string manifest_path;
  nlohmann::json result;
  nlohmann::json manifest;
};

/// Runs the configured experiment and writes <prefix>.csv,
/// <prefix>.result.json and <prefix>.manifest.json into the output directory.
/// Every file is a pure function of the config.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);
ExperimentOutput run_experiment(const nlohmann::json& config);

/// Procedure constants for an estimator (c from the Lepski rule or 1).
ProcedureConstants constants_for(const EstimatorDescriptor& est, int dim);

}  // namespace rholpa
