#include "stdd/bench/config.hpp"

#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>

#include "stdd/error.hpp"

namespace stdd::bench {

using nlohmann::json;

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::HeatManufactured: return "heat_manufactured";
    case ProblemKind::Adr: return "adr";
    case ProblemKind::Quasilinear: return "quasilinear";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::ConfigParse, where + ": " + msg);
}

const json& object_at(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(where, "unknown key '" + key + "'");
  }
  return j;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

template <typename T, typename Fn>
void optional_field(const json& obj, const char* key, const std::string& where, T& out, Fn convert) {
  if (auto it = obj.find(key); it != obj.end()) out = convert(*it, where + "." + key);
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Method method_from(const json& j, const std::string& where) {
  try {
    return parse_method(text(j, where));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigParse) throw;
    fail(where, e.what());
  }
}

void parse_problem(const json& j, ProblemSpec& p) {
  const std::string w = "problem";
  object_at(j, w, {"kind", "gamma", "adr", "source", "amplitude"});
  if (auto it = j.find("kind"); it != j.end()) {
    const std::string k = text(*it, w + ".kind");
    if (k == "heat_manufactured") {
      p.kind = ProblemKind::HeatManufactured;
    } else if (k == "adr") {
      p.kind = ProblemKind::Adr;
    } else if (k == "quasilinear") {
      p.kind = ProblemKind::Quasilinear;
    } else {
      fail(w + ".kind", "unknown problem kind '" + k + "'");
    }
  }
  p.source = p.kind == ProblemKind::HeatManufactured ? SourceKind::Manufactured : SourceKind::Bump;
  optional_field(j, "gamma", w, p.gamma, number);
  if (auto it = j.find("adr"); it != j.end()) {
    object_at(*it, w + ".adr", {"a", "b", "c"});
    optional_field(*it, "a", w + ".adr", p.adr_a, number);
    optional_field(*it, "b", w + ".adr", p.adr_b, number);
    optional_field(*it, "c", w + ".adr", p.adr_c, number);
  }
  if (auto it = j.find("source"); it != j.end()) {
    const std::string s = text(*it, w + ".source");
    if (s == "manufactured") {
      p.source = SourceKind::Manufactured;
    } else if (s == "bump") {
      p.source = SourceKind::Bump;
    } else {
      fail(w + ".source", "unknown source '" + s + "'");
    }
  }
  optional_field(j, "amplitude", w, p.amplitude, number);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigParse, std::string("invalid JSON: ") + e.what());
  }
  object_at(root, "config", {"schema_version", "problem", "discretization", "methods", "tolerances", "quadrature",
                             "initial_guess", "seed", "output", "sweep"});
  ExperimentConfig cfg;
  if (!root.contains("schema_version")) fail("config", "missing schema_version");
  cfg.schema_version = integer(root["schema_version"], "schema_version");
  if (cfg.schema_version != 1) fail("schema_version", "unsupported version " + std::to_string(cfg.schema_version));

  if (auto it = root.find("problem"); it != root.end()) parse_problem(*it, cfg.problem);

  if (auto it = root.find("discretization"); it != root.end()) {
    const std::string w = "discretization";
    object_at(*it, w, {"num_elements", "N", "tau", "interface"});
    optional_field(*it, "num_elements", w, cfg.num_elements, integer);
    optional_field(*it, "N", w, cfg.bands, integer);
    optional_field(*it, "tau", w, cfg.tau, number);
    optional_field(*it, "interface", w, cfg.interface, number);
  }

  if (!root.contains("methods") || !root["methods"].is_array() || root["methods"].empty()) {
    fail("methods", "at least one method is required");
  }
  for (std::size_t i = 0; i < root["methods"].size(); ++i) {
    const std::string w = "methods[" + std::to_string(i) + "]";
    const json& m = object_at(root["methods"][i], w, {"name", "label", "phi", "s"});
    if (!m.contains("name")) fail(w, "missing name");
    MethodSpec spec;
    spec.method = method_from(m["name"], w + ".name");
    if (spec.method == Method::Monolithic) fail(w + ".name", "the monolithic reference always runs");
    spec.s = spec.method == Method::RR ? 2.5 : (spec.method == Method::MDN2 ? 0.7 : 0.55);
    spec.label = to_string(spec.method);
    optional_field(m, "label", w, spec.label, text);
    optional_field(m, "phi", w, spec.phi, number);
    optional_field(m, "s", w, spec.s, number);
    for (const auto& other : cfg.methods) {
      if (other.label == spec.label) fail(w + ".label", "duplicate label '" + spec.label + "'");
    }
    cfg.methods.push_back(spec);
  }

  if (auto it = root.find("tolerances"); it != root.end()) {
    const std::string w = "tolerances";
    object_at(*it, w, {"outer", "max_outer", "inner"});
    optional_field(*it, "outer", w, cfg.tol, number);
    optional_field(*it, "max_outer", w, cfg.max_outer, integer);
    if (auto in = it->find("inner"); in != it->end()) {
      const std::string wi = w + ".inner";
      object_at(*in, wi, {"tol", "max_iter", "s", "phi"});
      optional_field(*in, "tol", wi, cfg.inner.tol, number);
      optional_field(*in, "max_iter", wi, cfg.inner.max_iter, integer);
      optional_field(*in, "s", wi, cfg.inner.s_inner, number);
      optional_field(*in, "phi", wi, cfg.inner.phi_inner, number);
    }
  }

  if (auto it = root.find("quadrature"); it != root.end()) {
    const std::string w = "quadrature";
    object_at(*it, w, {"window", "time_points", "panel_length", "space_points", "tail_budget", "error_time_points"});
    optional_field(*it, "window", w, cfg.quad.window, number);
    optional_field(*it, "time_points", w, cfg.quad.time_points, integer);
    optional_field(*it, "panel_length", w, cfg.quad.panel_length, number);
    optional_field(*it, "space_points", w, cfg.quad.space_points, integer);
    optional_field(*it, "tail_budget", w, cfg.quad.tail_budget, number);
    optional_field(*it, "error_time_points", w, cfg.error_time_points, integer);
  }

  if (auto it = root.find("initial_guess"); it != root.end()) {
    const std::string g = text(*it, "initial_guess");
    if (g == "zero") {
      cfg.initial_guess = InitialGuess::Zero;
    } else if (g == "random") {
      cfg.initial_guess = InitialGuess::Random;
    } else {
      fail("initial_guess", "expected 'zero' or 'random'");
    }
  }
  if (auto it = root.find("seed"); it != root.end()) {
    if (!it->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  if (auto it = root.find("output"); it != root.end()) {
    object_at(*it, "output", {"dir"});
    optional_field(*it, "dir", "output", cfg.output_dir, text);
  }
  if (auto it = root.find("sweep"); it != root.end()) {
    if (!it->is_array()) fail("sweep", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string w = "sweep[" + std::to_string(i) + "]";
      const json& g = object_at((*it)[i], w, {"method", "phi", "s"});
      if (!g.contains("method") || !g.contains("s")) fail(w, "needs method and s");
      SweepSpec spec;
      spec.method = method_from(g["method"], w + ".method");
      if (spec.method == Method::Monolithic) fail(w + ".method", "cannot sweep the monolithic solve");
      spec.s = number_list(g["s"], w + ".s");
      if (g.contains("phi")) spec.phi = number_list(g["phi"], w + ".phi");
      if (spec.method != Method::RR && spec.phi.empty()) fail(w + ".phi", "MDN sweeps need a phi grid");
      cfg.sweeps.push_back(std::move(spec));
    }
  }

  // Range checks beyond JSON types.
  if (cfg.num_elements < 2 || cfg.num_elements % 2 != 0) fail("discretization.num_elements", "must be even and >= 2");
  if (cfg.bands < 1) fail("discretization.N", "must be >= 1");
  if (!(cfg.tau > 0.0)) fail("discretization.tau", "must be positive");
  if (!(cfg.tol > 0.0) || cfg.max_outer < 1) fail("tolerances", "outer tol must be positive and max_outer >= 1");
  if (cfg.error_time_points < 1 || cfg.quad.time_points < 1 || cfg.quad.space_points < 1) {
    fail("quadrature", "point counts must be >= 1");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigParse, "cannot read config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace stdd::bench
