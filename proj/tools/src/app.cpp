#include "heavytail_cli/app.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "heavytail/errors.hpp"
#include "heavytail_cli/commands.hpp"
#include "heavytail_cli/config.hpp"

#ifndef HEAVYTAIL_VERSION
#define HEAVYTAIL_VERSION "unknown"
#endif

namespace heavytail::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string out;
  bool plot_data = false;
  std::string method;
  int l = 0;
  int n = 0;
  std::uint64_t samples = 0;
  std::uint64_t steps_cap = 0;
  double rel_tol = 0.0;
  std::vector<double> thresholds;
};

struct Given {
  CLI::Option* seed = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* samples = nullptr;
  CLI::Option* steps_cap = nullptr;
  CLI::Option* rel_tol = nullptr;
  CLI::Option* thresholds = nullptr;
  CLI::Option* method = nullptr;
  CLI::Option* l = nullptr;
  std::vector<CLI::Option*> n;
};

bool given(const CLI::Option* o) { return o && o->count() > 0; }

bool any_given(const std::vector<CLI::Option*>& opts) {
  for (auto* o : opts) {
    if (given(o)) return true;
  }
  return false;
}

void error_line(std::ostream& err, std::string_view kind, const std::string& message) {
  err << "error kind=" << kind << " message=" << json(message).dump() << '\n';
}

void apply_overrides(RunConfig& c, const std::string& command, const Flags& f,
                     const Given& g) {
  if (given(g.seed)) c.seed = f.seed;
  if (given(g.workers)) c.workers = f.workers;
  if (given(g.out)) c.out = f.out;
  if (f.plot_data) c.plot_data = true;

  const bool samples = given(g.samples);
  const bool steps = given(g.steps_cap);
  const bool grid = given(g.thresholds);
  const bool n = any_given(g.n);
  if (command == "sample-env" && samples) c.sample_env.samples = f.samples;
  if (command == "sim-bpre" && samples) c.sim_bpre.runs = f.samples;
  if (command == "sim-walk") {
    if (samples) c.sim_walk.runs = f.samples;
    if (steps) c.sim_walk.steps_cap = f.steps_cap;
    if (n) c.sim_walk.n = f.n;
  }
  if (command == "tail-z1") {
    if (given(g.method)) c.tail_z1.method = parse_method_name(f.method);
    if (samples) c.tail_z1.samples = f.samples;
    if (grid) c.tail_z1.thresholds = f.thresholds;
    if (given(g.rel_tol)) c.tail_z1.rel_tol = f.rel_tol;
  }
  if (command == "tail-zl") {
    if (given(g.l)) c.tail_zl.l = f.l;
    if (samples) c.tail_zl.samples = f.samples;
    if (grid) c.tail_zl.thresholds = f.thresholds;
  }
  if (command == "tail-tn") {
    if (n) c.tail_tn.n = f.n;
    if (samples) c.tail_tn.samples = f.samples;
    if (steps) c.tail_tn.steps_cap = f.steps_cap;
    if (grid) c.tail_tn.thresholds = f.thresholds;
  }
  if (command == "check-identity") {
    if (n) c.check_identity.n = f.n;
    if (samples) c.check_identity.samples = f.samples;
    if (steps) c.check_identity.steps_cap = f.steps_cap;
  }
  check_ranges(c);
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json versions() {
  return {{"heavytail", HEAVYTAIL_VERSION},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"fmt", FMT_VERSION},
          {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                        NLOHMANN_JSON_VERSION_MINOR,
                                        NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION}};
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

int execute(const std::string& command, const RunConfig& config, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  CommandOutput result = run_command(command, config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path main_path = config.out.empty() ? fs::path(command + ".csv") : fs::path(config.out);
  StagedFiles files;
  json outputs = json::array();
  files.add(main_path, result.main.render());
  outputs.push_back(main_path.string());
  for (const auto& [suffix, table] : result.extra) {
    const fs::path p = sibling(main_path, suffix);
    files.add(p, table.render());
    outputs.push_back(p.string());
  }
  if (config.plot_data) {
    const fs::path p = sibling(main_path, ".plot.csv");
    files.add(p, result.plot.table.render());
    outputs.push_back(p.string());
  }
  const fs::path manifest_path = sibling(main_path, ".manifest.json");
  json manifest = {{"command", command},
                   {"config", to_json(config)},
                   {"seed", config.seed},
                   {"workers", config.workers},
                   {"outputs", outputs},
                   {"summary", result.summary},
                   {"versions", versions()},
                   {"started_at", utc_timestamp(started)},
                   {"wall_time_seconds", wall}};
  files.add(manifest_path, manifest.dump(2) + "\n");
  files.commit();

  for (const auto& line : result.report) out << line << '\n';
  for (const auto& p : outputs) out << "output=" << p.get<std::string>() << '\n';
  out << "manifest=" << manifest_path.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heavy-tail experiments for geometric branching processes and "
               "random walks in random environment"};
  app.require_subcommand(1);
  Flags f;
  Given g;
  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  g.seed = app.add_option("--seed", f.seed, "Master seed");
  g.workers = app.add_option("--workers", f.workers, "Worker threads")
                  ->check(CLI::Range(1u, 1024u));
  g.out = app.add_option("--out", f.out, "Output CSV path");
  app.add_flag("--plot-data", f.plot_data, "Also write a long-format CSV for plotting");
  g.samples = app.add_option("--samples", f.samples, "Sample (or run) count");
  g.steps_cap = app.add_option("--steps-cap", f.steps_cap, "Walk step budget");
  g.rel_tol = app.add_option("--rel-tol", f.rel_tol, "Quadrature relative tolerance");
  g.thresholds = app.add_option("--thresholds", f.thresholds, "Threshold grid")
                     ->delimiter(',');

  const std::vector<std::pair<std::string, std::string>> descriptions{
      {"validate-env", "Check the environment law and report E[V]"},
      {"sample-env", "Draw V and A from the environment law"},
      {"sim-bpre", "Simulate BPRE trajectories"},
      {"sim-walk", "Simulate walks and their hitting times"},
      {"tail-z1", "Tail of the first generation size"},
      {"tail-zl", "Tail of generation l in iterated-log coordinates"},
      {"tail-tn", "Tail of the hitting-time statistic"},
      {"check-identity", "KS check of walk sums against BPRE partial sums"},
      {"check-nagaev", "Exact check of the geometric-sum lower bound"}};
  for (const auto& [name, text] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, text);
    sub->fallthrough();
    if (name == "tail-z1") {
      g.method = sub->add_option("--method", f.method, "mc, quadrature or predict")
                     ->check(CLI::IsMember({"mc", "quadrature", "predict"}));
    } else if (name == "tail-zl") {
      g.l = sub->add_option("--l", f.l, "Generation index");
    } else if (name == "tail-tn" || name == "check-identity" || name == "sim-walk") {
      g.n.push_back(sub->add_option("--n", f.n, "Target site"));
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_line(err, "UsageError", e.what());
    return kExitValidation;
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();

  try {
    RunConfig config = f.config.empty() ? RunConfig{} : load_config_file(f.config);
    apply_overrides(config, command, f, g);
    validate_spec(config.env);
    return execute(command, config, out);
  } catch (const Error& e) {
    error_line(err, to_string(e.kind()), e.what());
    switch (e.kind()) {
      case ErrorKind::kConfig:
      case ErrorKind::kSpecInvalid:
      case ErrorKind::kDomain:
        return kExitValidation;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    error_line(err, "InternalError", e.what());
    return kExitRuntime;
  }
}

}  // namespace heavytail::cli
