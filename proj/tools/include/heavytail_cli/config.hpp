#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "heavytail/env_model.hpp"
#include "heavytail/experiments.hpp"

namespace heavytail::cli {

struct SampleEnvBlock {
  std::uint64_t samples = 1000;
  UnderflowPolicy underflow = UnderflowPolicy::kClamp;
};

struct SimBpreBlock {
  std::uint64_t runs = 10;
  int generations = 10;
};

struct SimWalkBlock {
  std::uint64_t runs = 10;
  int n = 5;
  std::uint64_t steps_cap = 10'000'000;
  std::uint64_t left_window = 0;
  bool collapse_left_excursions = false;
};

struct TailZ1Block {
  Z1Method method = Z1Method::kMonteCarlo;
  int coordinate_depth = 0;
  std::vector<double> thresholds{1, 10, 100, 1000};
  std::uint64_t samples = 1'000'000;
  double rel_tol = 1e-10;
};

struct TailZlBlock {
  int l = 2;
  std::vector<double> thresholds{2, 4, 6, 8, 10};
  std::uint64_t samples = 1'000'000;
};

struct TailTnBlock {
  int n = 2;
  std::vector<double> thresholds{3, 4, 5};
  std::uint64_t samples = 100'000;
  std::uint64_t steps_cap = 10'000'000;
  bool collapse_left_excursions = true;
};

struct IdentityBlock {
  int n = 2;
  std::uint64_t samples = 100'000;
  std::uint64_t steps_cap = 2'000'002;
  bool collapse_left_excursions = true;
};

struct NagaevBlock {
  std::uint64_t n_min = 2;
  std::uint64_t n_max = 100;
  std::vector<double> q{0.5, 0.9, 0.99};
  std::vector<double> delta{0.05, 0.1, 0.3};
  /// Each (n, q, delta) is checked at x = x_min .. x_min + x_span.
  std::uint64_t x_span = 20;
  /// Adds the n = 1, delta = 1/2 rows on which the 1/(1 - delta) factor fails.
  bool include_printed_counterexample = true;
};

struct RunConfig {
  EnvironmentSpec env = reference_spec();
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out;
  bool plot_data = false;
  SampleEnvBlock sample_env;
  SimBpreBlock sim_bpre;
  SimWalkBlock sim_walk;
  TailZ1Block tail_z1;
  TailZlBlock tail_zl;
  TailTnBlock tail_tn;
  IdentityBlock check_identity;
  NagaevBlock check_nagaev;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the offending JSON path. Missing keys keep defaults.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

/// "mc", "quadrature" or "predict"; ConfigError otherwise.
Z1Method parse_method_name(const std::string& text);

/// Effective configuration, in the same shape parse_config accepts.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json env_to_json(const EnvironmentSpec& env);

/// Range checks that do not depend on the environment; run again after
/// command-line overrides are applied.
void check_ranges(const RunConfig& config);

}  // namespace heavytail::cli
