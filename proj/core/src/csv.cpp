// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "unguide/errors.hpp"

namespace unguide {

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw LookupError("CSV has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw ContractError("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                          std::to_string(table.header.size()));
    }
    line(row);
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line, std::size_t number) {
  if (line.find('"') != std::string_view::npos) {
    throw ParseError(number, "quoted fields are not supported");
  }
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t number = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    if (!line.empty() && line.back() == '\r') {
      throw ParseError(number, "CRLF line endings are not supported");
    }
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw ParseError(number, "empty line");
    }
    auto fields = split(line, number);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(number, "expected " + std::to_string(table.header.size()) +
                                   " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ParseError(1, "missing header row");
  return table;
}

double parse_number(std::string_view field, std::size_t line) {
  const std::string s(field);
  if (s.empty()) throw ParseError(line, "empty numeric field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(line, "'" + s + "' is not a finite number");
  }
  return v;
}

std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_samples(CsvTable& table, std::string_view label, const Tensor& points) {
  for (std::size_t r = 0; r < points.rows(); ++r) {
    std::vector<std::string> row{std::string(label)};
    for (std::size_t d = 0; d < points.cols(); ++d) row.push_back(format_float(points(r, d)));
    if (row.size() != table.header.size()) throw ShapeError("sample dimension differs from header");
    table.rows.push_back(std::move(row));
  }
}

CsvTable samples_table(std::string_view label, const Tensor& points) {
  CsvTable table;
  table.header = {"label"};
  const std::size_t dim = points.rank() == 2 ? points.cols() : 0;
  if (dim == 2) {
    table.header.insert(table.header.end(), {"x", "y"});
  } else {
    for (std::size_t d = 0; d < dim; ++d) table.header.push_back("x" + std::to_string(d));
  }
  append_samples(table, label, points);
  return table;
}

CsvTable metrics_table(const MetricsReport& report) {
  CsvTable table;
  table.header = {"prompt", "concept", "role", "n", "accuracy", "route", "w", "mean_c", "mean_c0"};
  for (const PromptResult& p : report.prompts) {
    table.rows.push_back({p.name, std::to_string(p.concept_id), std::string(to_string(p.role)),
                          std::to_string(p.n), format_double(p.accuracy),
                          std::string(to_string(p.route)), format_double(p.w),
                          format_double(p.mean_c), format_double(p.mean_c0)});
  }
  return table;
}

CsvTable norms_table(const std::vector<NormTableRow>& rows) {
  CsvTable table;
  table.header = {"steps",        "repeats",       "seed",   "mean_erased",
                  "mean_neutral", "mean_retained", "seconds"};
  for (const NormTableRow& r : rows) {
    table.rows.push_back({std::to_string(r.steps), std::to_string(r.repeats),
                          std::to_string(r.seed), format_double(r.mean_erased),
                          format_double(r.mean_neutral), format_double(r.mean_retained),
                          format_double(r.seconds)});
  }
  return table;
}

}  // namespace unguide
