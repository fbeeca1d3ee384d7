#include "crpd/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>
#include <vector>

#include "crpd/errors.hpp"

namespace crpd {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_cell(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last) return false;
  return std::isfinite(out);
}

}  // namespace

Dataset parse_csv_text(std::string_view text, const std::string& origin) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = i + 1;
    }
  }
  // a trailing newline produces one empty trailing entry; drop it
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  if (lines.empty()) throw EmptyFile(origin);

  Dataset data;
  const auto header = split_fields(lines[0]);
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string_view name = trim(header[j]);
    if (name.empty()) throw ParseError(origin, 1, j + 1, "empty column name");
    for (const auto& existing : data.columns) {
      if (existing == name) {
        throw ParseError(origin, 1, j + 1, "duplicate column name '" + std::string(name) + "'");
      }
    }
    data.columns.emplace_back(name);
  }
  const std::size_t width = data.columns.size();
  const std::size_t nrows = lines.size() - 1;
  if (nrows == 0) throw EmptyFile(origin);

  data.values.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < nrows; ++r) {
    const std::string_view line = lines[r + 1];
    if (line.empty()) throw ParseError(origin, r + 2, 1, "blank line inside the table");
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw ParseError(origin, r + 2, fields.size(),
                       "expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < width; ++j) {
      double v;
      if (!parse_cell(fields[j], v)) {
        throw NonNumericCell(origin, r + 2, j + 1, std::string(fields[j]));
      }
      data.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return data;
}

Dataset parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file_unreadable", "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv_text(buffer.str(), path);
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_csv(const Dataset& data, std::ostream& out) {
  for (std::size_t j = 0; j < data.columns.size(); ++j) {
    if (j) out << ',';
    out << data.columns[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(data.values(i, j));
    }
    out << '\n';
  }
}

std::string write_csv_string(const Dataset& data) {
  std::ostringstream out;
  write_csv(data, out);
  return out.str();
}

void validate_owen_fixture(const Dataset& data) {
  auto fail = [](const std::string& what) {
    throw DataError("fixture_invalid", "milk-production fixture: " + what);
  };
  if (data.n() != 22) fail("expected 22 records, found " + std::to_string(data.n()));
  const char* required[] = {"cow_id", "milk_lbs", "days", "mpd"};
  for (const char* name : required) {
    if (data.column_index(name) < 0) fail(std::string("missing column '") + name + "'");
  }
  const auto milk = data.values.col(data.column_index("milk_lbs"));
  const auto days = data.values.col(data.column_index("days"));
  const auto mpd = data.values.col(data.column_index("mpd"));
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!(days[i] > 0.0)) fail("days must be positive");
    const double ratio = milk[i] / days[i];
    if (std::fabs(ratio - mpd[i]) > 1e-9 * std::max(1.0, std::fabs(ratio))) {
      fail("mpd is not milk_lbs / days at record " + std::to_string(i));
    }
  }
  const double mean = mpd.mean();
  const double sd =
      std::sqrt((mpd.array() - mean).square().sum() / static_cast<double>(data.n() - 1));
  if (std::fabs(mean - 12.4250) > 1e-4) fail("mean(mpd) = " + format_double(mean));
  if (std::fabs(sd - 3.0750) > 1e-4) fail("sd(mpd) = " + format_double(sd));
  if (std::fabs(mpd.minCoeff() - 7.5470) > 1e-4) fail("min(mpd) = " + format_double(mpd.minCoeff()));
  if (std::fabs(mpd.maxCoeff() - 18.6610) > 1e-4) fail("max(mpd) = " + format_double(mpd.maxCoeff()));
}

}  // namespace crpd
