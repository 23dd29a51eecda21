#include "saloha/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace saloha::csv {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw std::invalid_argument("csv row has " + std::to_string(row.size()) + " fields, header has " +
                                std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

namespace {
void write_line(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}
}  // namespace

void Table::write(std::ostream& out) const {
  write_line(out, header_);
  for (const auto& row : rows_) write_line(out, row);
}

void Table::write_file(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Table distribution_table(const analytic::MapDistribution& dist) {
  Table t({"rho", "ccdf", "error"});
  for (std::size_t k = 0; k < dist.grid.size(); ++k)
    t.add_row({format_number(dist.grid[k]), format_number(dist.ccdf[k]),
               format_number(dist.error[k])});
  t.add_row({"atom", format_number(dist.atom_at_one), format_number(dist.atom_error)});
  return t;
}

std::vector<std::string> stats_header() {
  return {"spec", "variable", "grid_value", "statistic", "value", "stderr", "n"};
}

std::vector<std::string> stats_row(const std::string& spec, const std::string& variable,
                                   double grid_value, const std::string& statistic, double value,
                                   double std_error, std::size_t n) {
  return {spec, variable, format_number(grid_value), statistic, format_number(value),
          format_number(std_error), std::to_string(n)};
}

}  // namespace saloha::csv
