// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "unguide/eval.hpp"
#include "unguide/tensor.hpp"

namespace unguide {

/// Comma-separated, header row, '.' decimal point, LF line endings. Fields
/// never contain commas, quotes or line breaks.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`; LookupError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

std::string format_csv(const CsvTable& table);
/// ParseError (with 1-based line number) on empty input, ragged rows or
/// quoted fields.
CsvTable parse_csv(std::string_view text);

/// Parses a numeric field; `line` is the 1-based file line for errors.
double parse_number(std::string_view field, std::size_t line);

std::string format_float(float v);
std::string format_double(double v);

/// label,x,y (x0,x1,... beyond two dimensions)
CsvTable samples_table(std::string_view label, const Tensor& points);
void append_samples(CsvTable& table, std::string_view label, const Tensor& points);
/// prompt,concept,role,n,accuracy,route,w,mean_c,mean_c0
CsvTable metrics_table(const MetricsReport& report);
/// steps,repeats,seed,mean_erased,mean_neutral,mean_retained,seconds
CsvTable norms_table(const std::vector<NormTableRow>& rows);

}  // namespace unguide
