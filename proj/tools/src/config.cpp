#include "heavytail_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "heavytail/errors.hpp"

namespace heavytail::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::kConfig, path + ": " + what);
}

// Reader over one JSON object that remembers which keys were consumed.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_error(path_, "expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  const json* find(const char* key) {
    auto it = node_.find(key);
    if (it == node_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  std::string child(const char* key) const { return path_ + "." + key; }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) config_error(child(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) config_error(child(key), "expected a finite number");
    }
  }

  void count(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) {
        config_error(child(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void integer(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) config_error(child(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < -1'000'000 || x > 1'000'000) config_error(child(key), "out of range");
      out = static_cast<int>(x);
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) config_error(child(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) config_error(child(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) config_error(child(key), "expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) config_error(child(key), "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) config_error(path_ + "." + it.key(), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
void block(Reader& parent, const char* key, Fn&& fn) {
  if (const json* v = parent.find(key)) {
    Reader r(*v, parent.child(key));
    fn(r);
    r.finish();
  }
}

EnvironmentSpec parse_env(Reader& r) {
  EnvironmentSpec env = reference_spec();
  r.number("alpha", env.alpha);
  r.number("eta", env.eta);
  if (const json* l = r.find("L")) {
    Reader lr(*l, r.child("L"));
    std::string kind = "one";
    lr.string("kind", kind);
    if (kind == "one") {
      env.ell = SlowlyVarying::one();
    } else if (kind == "logpower") {
      double beta = 0.0;
      if (!lr.has("beta")) config_error(r.child("L") + ".beta", "required for logpower");
      lr.number("beta", beta);
      env.ell = SlowlyVarying::log_power(beta);
    } else {
      config_error(r.child("L") + ".kind", "expected \"one\" or \"logpower\"");
    }
    lr.finish();
  }
  if (const json* g = r.find("G")) {
    Reader gr(*g, r.child("G"));
    std::string kind = "pointmass";
    gr.string("kind", kind);
    if (kind == "pointmass") {
      double at = -2.0;
      if (!gr.has("at")) config_error(r.child("G") + ".at", "required for pointmass");
      gr.number("at", at);
      env.g = SubThresholdLaw::point_mass(at);
    } else if (kind == "uniform") {
      double lo = 0.0;
      double hi = 0.0;
      if (!gr.has("lo") || !gr.has("hi")) {
        config_error(r.child("G"), "uniform needs lo and hi");
      }
      gr.number("lo", lo);
      gr.number("hi", hi);
      env.g = SubThresholdLaw::uniform(lo, hi);
    } else {
      config_error(r.child("G") + ".kind", "expected \"pointmass\" or \"uniform\"");
    }
    gr.finish();
  }
  return env;
}

Z1Method parse_method(const std::string& text, const std::string& path) {
  if (text == "mc") return Z1Method::kMonteCarlo;
  if (text == "quadrature") return Z1Method::kQuadrature;
  if (text == "predict") return Z1Method::kPredict;
  config_error(path, "expected mc, quadrature or predict");
}

std::string method_name(Z1Method m) {
  switch (m) {
    case Z1Method::kMonteCarlo: return "mc";
    case Z1Method::kQuadrature: return "quadrature";
    case Z1Method::kPredict: return "predict";
  }
  return "mc";
}

void check_grid(const std::vector<double>& grid, const std::string& path) {
  if (grid.empty()) config_error(path, "threshold grid is empty");
  for (double t : grid) {
    if (!std::isfinite(t)) config_error(path, "thresholds must be finite");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    config_error(path, "thresholds must be sorted ascending");
  }
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) config_error(path, what);
}

}  // namespace

Z1Method parse_method_name(const std::string& text) {
  return parse_method(text, "tail_z1.method");
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Reader r(doc, "$");
  if (const json* env = r.find("env")) {
    Reader er(*env, "$.env");
    c.env = parse_env(er);
    er.finish();
  }
  r.count("seed", c.seed);
  std::uint64_t workers = c.workers;
  r.count("workers", workers);
  require(workers >= 1 && workers <= 1024, "$.workers", "must lie in [1, 1024]");
  c.workers = static_cast<unsigned>(workers);
  r.string("out", c.out);
  r.boolean("plot_data", c.plot_data);

  block(r, "sample_env", [&](Reader& b) {
    b.count("samples", c.sample_env.samples);
    std::string policy = c.sample_env.underflow == UnderflowPolicy::kClamp ? "clamp" : "error";
    b.string("underflow", policy);
    if (policy == "clamp") {
      c.sample_env.underflow = UnderflowPolicy::kClamp;
    } else if (policy == "error") {
      c.sample_env.underflow = UnderflowPolicy::kError;
    } else {
      config_error("$.sample_env.underflow", "expected \"clamp\" or \"error\"");
    }
  });
  block(r, "sim_bpre", [&](Reader& b) {
    b.count("runs", c.sim_bpre.runs);
    b.integer("generations", c.sim_bpre.generations);
  });
  block(r, "sim_walk", [&](Reader& b) {
    b.count("runs", c.sim_walk.runs);
    b.integer("n", c.sim_walk.n);
    b.count("steps_cap", c.sim_walk.steps_cap);
    b.count("left_window", c.sim_walk.left_window);
    b.boolean("collapse_left_excursions", c.sim_walk.collapse_left_excursions);
  });
  block(r, "tail_z1", [&](Reader& b) {
    std::string method = method_name(c.tail_z1.method);
    b.string("method", method);
    c.tail_z1.method = parse_method(method, "$.tail_z1.method");
    std::string coord = c.tail_z1.coordinate_depth == 0 ? "raw" : "log1";
    b.string("coordinate", coord);
    if (coord == "raw") {
      c.tail_z1.coordinate_depth = 0;
    } else if (coord == "log1") {
      c.tail_z1.coordinate_depth = 1;
    } else {
      config_error("$.tail_z1.coordinate", "expected \"raw\" or \"log1\"");
    }
    b.numbers("thresholds", c.tail_z1.thresholds);
    b.count("samples", c.tail_z1.samples);
    b.number("rel_tol", c.tail_z1.rel_tol);
  });
  block(r, "tail_zl", [&](Reader& b) {
    b.integer("l", c.tail_zl.l);
    b.numbers("thresholds", c.tail_zl.thresholds);
    b.count("samples", c.tail_zl.samples);
  });
  block(r, "tail_tn", [&](Reader& b) {
    b.integer("n", c.tail_tn.n);
    b.numbers("thresholds", c.tail_tn.thresholds);
    b.count("samples", c.tail_tn.samples);
    b.count("steps_cap", c.tail_tn.steps_cap);
    b.boolean("collapse_left_excursions", c.tail_tn.collapse_left_excursions);
  });
  block(r, "check_identity", [&](Reader& b) {
    b.integer("n", c.check_identity.n);
    b.count("samples", c.check_identity.samples);
    b.count("steps_cap", c.check_identity.steps_cap);
    b.boolean("collapse_left_excursions", c.check_identity.collapse_left_excursions);
  });
  block(r, "check_nagaev", [&](Reader& b) {
    b.count("n_min", c.check_nagaev.n_min);
    b.count("n_max", c.check_nagaev.n_max);
    b.numbers("q", c.check_nagaev.q);
    b.numbers("delta", c.check_nagaev.delta);
    b.count("x_span", c.check_nagaev.x_span);
    b.boolean("include_printed_counterexample",
              c.check_nagaev.include_printed_counterexample);
  });
  r.finish();
  check_ranges(c);
  return c;
}

void check_ranges(const RunConfig& c) {
  require(c.workers >= 1 && c.workers <= 1024, "$.workers", "must lie in [1, 1024]");
  require(c.sample_env.samples >= 1, "$.sample_env.samples", "must be >= 1");
  require(c.sim_bpre.runs >= 1, "$.sim_bpre.runs", "must be >= 1");
  require(c.sim_bpre.generations >= 1 && c.sim_bpre.generations <= 100'000,
          "$.sim_bpre.generations", "must lie in [1, 100000]");
  require(c.sim_walk.runs >= 1, "$.sim_walk.runs", "must be >= 1");
  require(c.sim_walk.n >= 1, "$.sim_walk.n", "must be >= 1");
  require(c.sim_walk.steps_cap >= static_cast<std::uint64_t>(c.sim_walk.n),
          "$.sim_walk.steps_cap", "must be >= n");
  require(c.sim_walk.left_window <= 1'000'000, "$.sim_walk.left_window",
          "must be <= 1000000");

  check_grid(c.tail_z1.thresholds, "$.tail_z1.thresholds");
  if (c.tail_z1.coordinate_depth == 0) {
    require(c.tail_z1.thresholds.front() >= 0.0, "$.tail_z1.thresholds",
            "raw thresholds must be >= 0");
  }
  require(c.tail_z1.samples >= 1, "$.tail_z1.samples", "must be >= 1");
  require(c.tail_z1.rel_tol >= 1e-12 && c.tail_z1.rel_tol <= 1e-4,
          "$.tail_z1.rel_tol", "must lie in [1e-12, 1e-4]");

  require(c.tail_zl.l >= 2 && c.tail_zl.l <= 64, "$.tail_zl.l", "must lie in [2, 64]");
  check_grid(c.tail_zl.thresholds, "$.tail_zl.thresholds");
  require(c.tail_zl.samples >= 1, "$.tail_zl.samples", "must be >= 1");

  require(c.tail_tn.n >= 2 && c.tail_tn.n <= 64, "$.tail_tn.n", "must lie in [2, 64]");
  check_grid(c.tail_tn.thresholds, "$.tail_tn.thresholds");
  require(c.tail_tn.samples >= 1, "$.tail_tn.samples", "must be >= 1");
  require(c.tail_tn.steps_cap >= static_cast<std::uint64_t>(c.tail_tn.n),
          "$.tail_tn.steps_cap", "must be >= n");

  require(c.check_identity.n >= 1, "$.check_identity.n", "must be >= 1");
  require(c.check_identity.samples >= 1, "$.check_identity.samples", "must be >= 1");
  require(c.check_identity.steps_cap >= static_cast<std::uint64_t>(c.check_identity.n),
          "$.check_identity.steps_cap", "must be >= n");

  const auto& ng = c.check_nagaev;
  require(ng.n_min >= 1 && ng.n_min <= ng.n_max && ng.n_max <= 10'000,
          "$.check_nagaev", "need 1 <= n_min <= n_max <= 10000");
  require(!ng.q.empty() && !ng.delta.empty(), "$.check_nagaev",
          "q and delta must be nonempty");
  for (double q : ng.q) require(q > 0.0 && q < 1.0, "$.check_nagaev.q", "values must lie in (0, 1)");
  for (double d : ng.delta) {
    require(d > 0.0 && d < 1.0, "$.check_nagaev.delta", "values must lie in (0, 1)");
  }
  require(ng.x_span <= 10'000, "$.check_nagaev.x_span", "must be <= 10000");
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfig, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json env_to_json(const EnvironmentSpec& env) {
  json j;
  j["alpha"] = env.alpha;
  j["eta"] = env.eta;
  if (env.ell.is_constant()) {
    j["L"] = {{"kind", "one"}};
  } else {
    j["L"] = {{"kind", "logpower"}, {"beta", env.ell.beta()}};
  }
  if (env.g.kind() == SubThresholdLaw::Kind::kPointMass) {
    j["G"] = {{"kind", "pointmass"}, {"at", env.g.location()}};
  } else {
    j["G"] = {{"kind", "uniform"}, {"lo", env.g.lo()}, {"hi", env.g.hi()}};
  }
  return j;
}

json to_json(const RunConfig& c) {
  json j;
  j["env"] = env_to_json(c.env);
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["plot_data"] = c.plot_data;
  j["sample_env"] = {
      {"samples", c.sample_env.samples},
      {"underflow", c.sample_env.underflow == UnderflowPolicy::kClamp ? "clamp" : "error"}};
  j["sim_bpre"] = {{"runs", c.sim_bpre.runs}, {"generations", c.sim_bpre.generations}};
  j["sim_walk"] = {{"runs", c.sim_walk.runs},
                   {"n", c.sim_walk.n},
                   {"steps_cap", c.sim_walk.steps_cap},
                   {"left_window", c.sim_walk.left_window},
                   {"collapse_left_excursions", c.sim_walk.collapse_left_excursions}};
  j["tail_z1"] = {{"method", method_name(c.tail_z1.method)},
                  {"coordinate", c.tail_z1.coordinate_depth == 0 ? "raw" : "log1"},
                  {"thresholds", c.tail_z1.thresholds},
                  {"samples", c.tail_z1.samples},
                  {"rel_tol", c.tail_z1.rel_tol}};
  j["tail_zl"] = {{"l", c.tail_zl.l},
                  {"thresholds", c.tail_zl.thresholds},
                  {"samples", c.tail_zl.samples}};
  j["tail_tn"] = {{"n", c.tail_tn.n},
                  {"thresholds", c.tail_tn.thresholds},
                  {"samples", c.tail_tn.samples},
                  {"steps_cap", c.tail_tn.steps_cap},
                  {"collapse_left_excursions", c.tail_tn.collapse_left_excursions}};
  j["check_identity"] = {{"n", c.check_identity.n},
                         {"samples", c.check_identity.samples},
                         {"steps_cap", c.check_identity.steps_cap},
                         {"collapse_left_excursions",
                          c.check_identity.collapse_left_excursions}};
  j["check_nagaev"] = {
      {"n_min", c.check_nagaev.n_min},
      {"n_max", c.check_nagaev.n_max},
      {"q", c.check_nagaev.q},
      {"delta", c.check_nagaev.delta},
      {"x_span", c.check_nagaev.x_span},
      {"include_printed_counterexample", c.check_nagaev.include_printed_counterexample}};
  return j;
}

}  // namespace heavytail::cli
