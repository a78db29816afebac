#include "drovar_cli/csv_input.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "drovar/errors.hpp"

namespace drovar::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column,
                  const std::string& source) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw CliError(2, source + ": non-numeric value '" + cell + "' at row " + std::to_string(row) +
                          ", column '" + column + "'");
  }
  return v;
}

struct Weighted {
  EmpiricalMeasure measure;
  std::vector<std::size_t> kept;
};

Weighted weights_of(const CsvTable& table) {
  const std::size_t n = table.rows.size();
  const long wcol = table.column("weight");
  if (wcol < 0) {
    Weighted out{EmpiricalMeasure::uniform(n), {}};
    for (std::size_t i = 0; i < n; ++i) out.kept.push_back(i);
    return out;
  }
  std::vector<double> raw;
  raw.reserve(n);
  for (const auto& row : table.rows) raw.push_back(row[static_cast<std::size_t>(wcol)]);
  NormalizedWeights nw = normalize(raw);
  Weighted out{std::move(nw.measure), {}};
  std::size_t d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d < nw.dropped.size() && nw.dropped[d] == i) {
      ++d;
      continue;
    }
    out.kept.push_back(i);
  }
  return out;
}

std::vector<double> column_values(const CsvTable& table, long col,
                                  const std::vector<std::size_t>& kept) {
  std::vector<double> out;
  out.reserve(kept.size());
  for (const std::size_t i : kept) {
    out.push_back(col < 0 ? 0.0 : table.rows[i][static_cast<std::size_t>(col)]);
  }
  return out;
}

}  // namespace

long CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<long>(i);
  }
  return -1;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (!have_header) {
      table.header = split(line);
      have_header = true;
      continue;
    }
    ++row;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw CliError(2, source + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values.push_back(parse_cell(cells[c], row, table.header[c], source));
    }
    table.rows.push_back(std::move(values));
  }
  if (!have_header) throw CliError(2, source + ": empty file");
  if (table.rows.empty()) throw CliError(2, source + ": no data rows");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(2, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

BoundInput bound_input(const CsvTable& table, bool require_phi) {
  const long rho = table.column("rho");
  const long phi = table.column("phi");
  if (rho < 0) throw CliError(2, "missing required column 'rho'");
  if (require_phi && phi < 0) throw CliError(2, "missing required column 'phi'");
  Weighted w = weights_of(table);
  ProblemData data(column_values(table, rho, w.kept), column_values(table, phi, w.kept));
  return {std::move(w.measure), std::move(data), table.rows.size(), std::move(w.kept)};
}

ScenarioInput scenario_input(const CsvTable& table) {
  std::vector<long> cols;
  for (int j = 1;; ++j) {
    const long c = table.column("r" + std::to_string(j));
    if (c < 0) break;
    cols.push_back(c);
  }
  if (cols.empty()) throw CliError(2, "missing required column 'r1'");
  Weighted w = weights_of(table);
  std::vector<std::vector<double>> rows;
  rows.reserve(w.kept.size());
  for (const std::size_t i : w.kept) {
    std::vector<double> r;
    for (const long c : cols) r.push_back(table.rows[i][static_cast<std::size_t>(c)]);
    rows.push_back(std::move(r));
  }
  ScenarioMatrix scenarios(std::move(rows), std::move(w.measure));
  return {std::move(scenarios), table.rows.size(), std::move(w.kept)};
}

}  // namespace drovar::cli
