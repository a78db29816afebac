#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "drovar/measures.hpp"
#include "drovar/robust.hpp"

namespace drovar::cli {

/// Error carrying the process exit code it maps to.
class CliError : public std::runtime_error {
public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

private:
  int code_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column, or -1.
  long column(const std::string& name) const;
};

/// Comma-separated numeric table with a header line. Blank lines are
/// skipped; cells are trimmed. Throws CliError(2) on unreadable or empty
/// input, ragged rows and non-numeric cells.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<input>");

struct BoundInput {
  EmpiricalMeasure measure;
  ProblemData data;
  /// Row count before zero-weight rows were dropped.
  std::size_t raw_rows = 0;
  /// Original row index of every retained row.
  std::vector<std::size_t> kept;
};

/// Columns `rho` and (if require_phi) `phi`, optional `weight`. Without
/// `phi` the phi column is taken as zero.
BoundInput bound_input(const CsvTable& table, bool require_phi = true);

struct ScenarioInput {
  ScenarioMatrix scenarios;
  std::size_t raw_rows = 0;
  std::vector<std::size_t> kept;
};

/// Columns `r1`..`rd` (consecutive), optional `weight`.
ScenarioInput scenario_input(const CsvTable& table);

}  // namespace drovar::cli
