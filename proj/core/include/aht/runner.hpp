#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aht/catalog.hpp"

namespace aht {

enum ExitCode : int {
  kExitPass = 0,
  kExitResidualFailure = 1,
  kExitConfigError = 2,
  kExitGeometryError = 3,
  kExitFlowStall = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlowParams {
  int m = 16;
  int max_iter = 5000;
  double tol_grad = 1e-5;
  int gradient_fields = 10;
};

struct RunConfig {
  std::string command;        // inspect, verify, classify, flow
  GeometrySpec geometry;
  std::string geometry_json;  // canonical echo of the geometry block
  int point_count = 8;
  std::uint64_t point_seed = 0;
  std::vector<std::vector<double>> point_list;  // overrides count/seed when non-empty
  double tol = 1e-7;
  FlowParams flow;
  std::string out;
};

struct CliOverrides {
  std::string command;  // must agree with the config's "command" when both are present
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;  // point seed; also the geometry seed of a random flow start
  std::optional<std::string> out;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError; geometry construction failures raise GeometryError.
RunConfig parse_config(const std::string& json_text, const CliOverrides& overrides = {});

struct RunOutput {
  int exit_code = kExitPass;
  std::string report;     // JSON
  std::string trace_csv;  // flow only
  std::string grid_json;  // flow only
  std::string out;        // resolved output path, empty for stdout
};

/// Runs a parsed configuration. Throws GeometryError for domain problems.
RunOutput run(const RunConfig& cfg);

/// parse_config + run; every failure becomes an exit code and an error report.
RunOutput execute(const std::string& json_text, const CliOverrides& overrides = {});

/// Writes the report to `out` (stdout when empty is the caller's job) and, for
/// flow runs, `<stem>.trace.csv` and `<stem>.grid.json` next to it. Returns written paths.
std::vector<std::string> write_outputs(const RunOutput& output, const std::string& out);

}  // namespace aht
