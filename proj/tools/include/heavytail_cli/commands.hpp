#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "heavytail_cli/config.hpp"
#include "heavytail_cli/output.hpp"

namespace heavytail::cli {

struct CommandOutput {
  Table main;
  /// Extra tables written next to the main CSV as <stem><suffix>.
  std::vector<std::pair<std::string, Table>> extra;
  PlotData plot;
  /// Command-specific results copied into the manifest.
  nlohmann::json summary = nlohmann::json::object();
  /// Human-readable key=value lines for stdout.
  std::vector<std::string> report;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand on a fully validated config. Throws heavytail::Error.
CommandOutput run_command(const std::string& name, const RunConfig& config);

}  // namespace heavytail::cli
