#pragma once

// Run configuration, command implementations and file formats for the CLI.
//
// CSV: comma separated, '.' decimal, '#'-prefixed "key: value" metadata lines,
// then one column-name row. Numbers are printed with 12 significant digits.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qsense/bloch.hpp"
#include "qsense/grid.hpp"
#include "qsense/protocols.hpp"
#include "qsense/sensitivity.hpp"
#include "qsense/shot_lab.hpp"
#include "qsense/stabilization.hpp"

namespace qsense::io {

inline constexpr const char* kToolName = "qsense";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "QSENSE_OUTPUT_DIR";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class UnitSystem { dimensionless, si };

struct RunConfig {
  std::string command;
  UnitSystem units = UnitSystem::dimensionless;
  // Conversion scale for SI runs (seconds); 1 in dimensionless runs.
  double t2_seconds = 1.0;

  // Everything below is dimensionless: times in T2, rates in 1/T2.
  double t1_over_t2 = 1.0;
  double eta = 1.0;
  double delta = 0.0;
  double v_x0 = 0.5;
  std::string protocol = "stabilized";
  double h_max = kDefaultCapOverGamma2;
  double t_end = 5.0;
  double dt = 0.01;
  Mode mode = Mode::per_shot;

  std::vector<double> t1_over_t2_grid{0.5, 0.75, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> v_x0_grid;
  double miscal_range = 0.3;
  std::size_t miscal_points = 41;

  std::vector<double> deltas = default_detunings();
  std::uint64_t shots = 1'000'000;
  std::size_t iterations = 20;
  std::size_t chunks = 10;
  double contrast = 1.0;
  std::uint64_t seed = 1;
  double t2_drift = 0.0;
  bool exact_sampling = false;

  std::string output;
  std::string summary;

  // The configuration as given (after overrides), echoed into every output.
  nlohmann::json source = nlohmann::json::object();

  DecoherenceParams params() const { return DecoherenceParams::from_t1_over_t2(t1_over_t2, eta); }
};

const std::vector<std::string>& command_names();

// Validates field names, unit discipline and ranges. Throws ConfigError.
RunConfig parse_config(const std::string& command, const nlohmann::json& config);

// Applies "field.path=value" (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::json& config, const std::string& assignment);

struct CsvDocument {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  const std::string* meta_value(const std::string& key) const;
  std::size_t column(const std::string& name) const;
};

std::string format_number(double v);
double parse_number(const std::string& s);

void write_csv(std::ostream& os, const CsvDocument& doc);
CsvDocument read_csv(std::istream& is);

struct CommandOutput {
  std::string primary;
  std::string primary_extension;  // "csv" or "json"
  std::string summary;            // JSON, shots only
};

CommandOutput run_command(const RunConfig& config);

CommandOutput cmd_simulate(const RunConfig& config);
CommandOutput cmd_optimize(const RunConfig& config);
CommandOutput cmd_sweep(const RunConfig& config);
CommandOutput cmd_miscal(const RunConfig& config);
CommandOutput cmd_shots(const RunConfig& config);
CommandOutput cmd_waveform(const RunConfig& config);

// Readers for the emitted formats (values converted back to dimensionless units).
Trajectory read_trajectory(const CsvDocument& doc);
Matrix read_matrix(const CsvDocument& doc, const std::string& row_column, const std::string& col_column);
std::vector<ShotRecord> read_records(const CsvDocument& doc);
nlohmann::json report_to_json(const ImprovementReport& r);
ImprovementReport report_from_json(const nlohmann::json& j);

}  // namespace qsense::io
