#pragma once

// Subcommand execution and result files.

#include <string>
#include <variant>
#include <vector>

#include "config.hpp"

namespace modecouple::cli {

inline constexpr const char* version = "1.0.0";

/// Results table: one record per grid or cycle point.
struct Table {
  using Cell = std::variant<double, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
  /// Numeric column by name; throws for unknown or text columns.
  std::vector<double> column(const std::string& name) const;
};

/// Numbers carry 12 significant digits.
std::string format_number(double v);

std::string to_csv(const Table& t);
void write_csv(const std::string& path, const Table& t);
/// Inverse of to_csv: cells that parse fully as numbers become doubles.
Table parse_csv(const std::string& text);
Table read_csv(const std::string& path);

struct RunOutput {
  /// Main table first, then extra plot data.
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<FittedValue> fitted;
  std::string config_hash;
};

/// Execute the protocol or scan for rc.subcommand.
RunOutput execute(const RunConfig& rc);

/// --output flag, then output.directory, then MODECOUPLE_OUTPUT_DIR, then ".".
std::string output_directory(const std::string& flag, const RunConfig& rc);

/// Run and write <prefix>.csv, extra tables and <prefix>_manifest.txt into
/// `directory`. Returns the written paths.
std::vector<std::string> run(const RunConfig& rc, const std::string& directory);

}  // namespace modecouple::cli
