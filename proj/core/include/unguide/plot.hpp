// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "unguide/csv.hpp"

namespace unguide {

/// Scatter of a samples table (label,x,y): one <g class="series"> per label.
std::string render_scatter_svg(const CsvTable& samples);

/// Norm table: one <polyline class="series"> per prompt class (erased,
/// neutral, retained) against steps; rows sharing a step are averaged.
std::string render_norms_svg(const CsvTable& norms);

/// Dispatches on the header: a `label` column means samples, `mean_erased`
/// means norms. ParseError with a line number on malformed input.
std::string render_svg(const CsvTable& table);

void emit_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path);

}  // namespace unguide
