#pragma once

/// \file
/// CSV output with a fixed column order and locale-independent number
/// formatting (shortest round-trip form), so identical runs give identical bytes.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "saloha/analytic.hpp"

namespace saloha::csv {

/// Shortest decimal that round-trips; "inf", "-inf" and "nan" otherwise.
std::string format_number(double value);

/// Quotes a field when it holds a comma, quote or newline.
std::string escape(const std::string& field);

class Table {
 public:
  explicit Table(std::vector<std::string> header);

  /// Throws std::invalid_argument when the row width differs from the header.
  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& out) const;
  /// Creates parent directories. Throws std::runtime_error on IO failure.
  void write_file(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Columns rho,ccdf,error; one row per grid point, then `atom` in the rho
/// column for P(psi = 1).
Table distribution_table(const analytic::MapDistribution& dist);

/// Column set shared by simulate, utility, sweep and validate output.
std::vector<std::string> stats_header();

/// One row of the stats schema.
std::vector<std::string> stats_row(const std::string& spec, const std::string& variable,
                                   double grid_value, const std::string& statistic, double value,
                                   double std_error, std::size_t n);

}  // namespace saloha::csv
