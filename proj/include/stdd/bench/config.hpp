#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stdd/dd_solvers.hpp"

namespace stdd::bench {

enum class ProblemKind { HeatManufactured, Adr, Quasilinear };
enum class SourceKind { Manufactured, Bump };
enum class InitialGuess { Zero, Random };

const char* to_string(ProblemKind kind);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::HeatManufactured;
  double gamma = 0.25;              // quasilinear only
  double adr_a = 1.0, adr_b = 0.0, adr_c = 0.0;
  SourceKind source = SourceKind::Manufactured;
  double amplitude = 1.0;           // bump source scale
};

struct MethodSpec {
  Method method = Method::MDN1;
  std::string label;                // defaults to the method name
  double phi = 0.02 * std::numbers::pi;
  double s = 0.55;
};

struct SweepSpec {
  Method method = Method::MDN1;
  std::vector<double> phi;          // ignored for RR
  std::vector<double> s;
};

/// Parsed experiment description.  The on-disk format is JSON; see README.
struct ExperimentConfig {
  int schema_version = 1;
  ProblemSpec problem;
  int num_elements = 64;
  int bands = 64;
  double tau = 0.5;
  double interface = 0.5;
  std::vector<MethodSpec> methods;
  double tol = 1e-10;
  int max_outer = 60;
  InnerConfig inner;
  QuadratureSpec quad;
  int error_time_points = 8;        // Gauss points per panel for e_e on (0, 1)
  InitialGuess initial_guess = InitialGuess::Zero;
  std::uint64_t seed = 0;
  std::string output_dir = "stdd_out";
  std::vector<SweepSpec> sweeps;
};

/// Parses and validates; throws config-parse-error with the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace stdd::bench
