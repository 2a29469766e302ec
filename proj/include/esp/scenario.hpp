#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace esp::scenario {

struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& what, int line_, int column_)
      : std::runtime_error(what), line(line_), column(column_) {}
};

struct ValidationError : std::runtime_error {
  std::string field;
  ValidationError(const std::string& what, std::string field_)
      : std::runtime_error(what), field(std::move(field_)) {}
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One named table: a header row plus numeric rows.
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Results of one campaign unit (typically one seed).
struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Series> series;
};

struct ResultSet {
  std::string kind;
  std::string version;    // library version string
  int schema_version = 0; // config schema
  nlohmann::ordered_json scenario; // validated input echo
  std::vector<RunRecord> records;
  std::vector<std::pair<std::string, double>> aggregates;
  std::vector<Series> aggregate_series;
  bool converged = true; // false flags partial results
};

enum class EmitFormat { tabular, structured };

struct RunOverrides {
  std::optional<std::uint64_t> seed; // replaces the config seed list
  int workers = 1;
};

/// Names of the supported experiment kinds.
const std::vector<std::string>& scenario_kinds();

/// Parses, validates and executes the scenario in the config file.
ResultSet run_scenario(const std::filesystem::path& config_path,
                       const RunOverrides& overrides = {});

/// Writes result files under out_dir (atomically, temp file plus rename).
/// Tabular: one CSV per series name, record series gain a leading seed
/// column. Structured: a single summary.json mirroring the ResultSet.
void emit_results(const ResultSet& results, EmitFormat format,
                  const std::filesystem::path& out_dir);

/// Output directory declared by the scenario (the "output" key).
std::string declared_output(const ResultSet& results);

} // namespace esp::scenario
