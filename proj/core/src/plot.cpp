// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/plot.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "unguide/errors.hpp"
#include "unguide/fileio.hpp"

namespace unguide {
namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 360.0;
constexpr double kMargin = 40.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(Range x, Range y) : x_(x), y_(y) {}

  double px(double v) const {
    return kMargin + (v - x_.lo) / (x_.hi - x_.lo) * (kWidth - 2 * kMargin);
  }
  double py(double v) const {
    return kHeight - kMargin - (v - y_.lo) / (y_.hi - y_.lo) * (kHeight - 2 * kMargin);
  }

  std::string open(const std::string& xlabel, const std::string& ylabel) const {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    s += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) + "\" x2=\"" +
         num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) + "\"/>\n";
    s += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) +
         "\" y2=\"" + num(kHeight - kMargin) + "\"/>\n";
    s += "</g>\n";
    s += "<g class=\"labels\" font-family=\"sans-serif\" font-size=\"10\">\n";
    s += "<text x=\"" + num(kMargin) + "\" y=\"" + num(kHeight - kMargin + 14) + "\">" +
         num(x_.lo) + "</text>\n";
    s += "<text x=\"" + num(kWidth - kMargin) + "\" y=\"" + num(kHeight - kMargin + 14) +
         "\" text-anchor=\"end\">" + num(x_.hi) + "</text>\n";
    s += "<text x=\"" + num(kMargin - 4) + "\" y=\"" + num(kHeight - kMargin) +
         "\" text-anchor=\"end\">" + num(y_.lo) + "</text>\n";
    s += "<text x=\"" + num(kMargin - 4) + "\" y=\"" + num(kMargin + 4) +
         "\" text-anchor=\"end\">" + num(y_.hi) + "</text>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 8) +
         "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
    s += "<text x=\"12\" y=\"" + num(kHeight / 2) + "\" transform=\"rotate(-90 12 " +
         num(kHeight / 2) + ")\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";
    s += "</g>\n";
    return s;
  }

  static std::string close() { return "</svg>\n"; }

 private:
  Range x_;
  Range y_;
};

std::string legend(const std::vector<std::string>& names) {
  std::string s = "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kMargin + 12.0 * static_cast<double>(i);
    s += "<text x=\"" + num(kWidth - kMargin) + "\" y=\"" + num(y) + "\" text-anchor=\"end\" fill=\"" +
         kPalette[i % kPalette.size()] + "\">" + escape(names[i]) + "</text>\n";
  }
  s += "</g>\n";
  return s;
}

}  // namespace

std::string render_scatter_svg(const CsvTable& samples) {
  const std::size_t label_col = samples.column("label");
  if (samples.header.size() < 3) throw ParseError(1, "samples need at least two coordinates");
  // Plots the first two coordinates.
  const std::size_t x_col = label_col == 0 ? 1 : 0;
  const std::size_t y_col = x_col + 1 == label_col ? x_col + 2 : x_col + 1;

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> groups;
  Range xr;
  Range yr;
  for (std::size_t r = 0; r < samples.rows.size(); ++r) {
    const auto& row = samples.rows[r];
    const double x = parse_number(row[x_col], r + 2);
    const double y = parse_number(row[y_col], r + 2);
    xr.add(x);
    yr.add(y);
    auto [it, inserted] = groups.try_emplace(row[label_col]);
    if (inserted) order.push_back(row[label_col]);
    it->second.emplace_back(x, y);
  }
  xr.finish();
  yr.finish();

  const Canvas canvas(xr, yr);
  std::string s = canvas.open(samples.header[x_col], samples.header[y_col]);
  for (std::size_t i = 0; i < order.size(); ++i) {
    s += "<g class=\"series\" data-label=\"" + escape(order[i]) + "\" fill=\"" +
         kPalette[i % kPalette.size()] + "\">\n";
    for (const auto& [x, y] : groups[order[i]]) {
      s += "<circle cx=\"" + num(canvas.px(x)) + "\" cy=\"" + num(canvas.py(y)) + "\" r=\"2\"/>\n";
    }
    s += "</g>\n";
  }
  if (!order.empty()) s += legend(order);
  return s + Canvas::close();
}

std::string render_norms_svg(const CsvTable& norms) {
  const std::size_t steps_col = norms.column("steps");
  const std::array<std::string, 3> classes = {"erased", "neutral", "retained"};
  std::array<std::size_t, 3> cols{};
  for (std::size_t k = 0; k < classes.size(); ++k) cols[k] = norms.column("mean_" + classes[k]);

  // steps -> (sums per class, count)
  std::map<double, std::pair<std::array<double, 3>, std::size_t>> cells;
  Range xr;
  Range yr;
  for (std::size_t r = 0; r < norms.rows.size(); ++r) {
    const auto& row = norms.rows[r];
    const double steps = parse_number(row[steps_col], r + 2);
    auto& cell = cells[steps];
    for (std::size_t k = 0; k < classes.size(); ++k) {
      cell.first[k] += parse_number(row[cols[k]], r + 2);
    }
    ++cell.second;
    xr.add(steps);
  }
  for (const auto& [steps, cell] : cells) {
    for (double v : cell.first) yr.add(v / static_cast<double>(cell.second));
  }
  xr.finish();
  yr.finish();

  const Canvas canvas(xr, yr);
  std::string s = canvas.open("steps", "mean divergence norm");
  if (!cells.empty()) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      std::string points;
      for (const auto& [steps, cell] : cells) {
        if (!points.empty()) points += ' ';
        points += num(canvas.px(steps)) + "," +
                  num(canvas.py(cell.first[k] / static_cast<double>(cell.second)));
      }
      s += "<polyline class=\"series\" data-label=\"" + classes[k] + "\" fill=\"none\" stroke=\"" +
           kPalette[k] + "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    s += legend({classes.begin(), classes.end()});
  }
  return s + Canvas::close();
}

std::string render_svg(const CsvTable& table) {
  if (table.has_column("label")) return render_scatter_svg(table);
  if (table.has_column("mean_erased")) return render_norms_svg(table);
  throw ParseError(1, "header matches neither a samples nor a norms table");
}

void emit_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path) {
  const CsvTable table = parse_csv(read_file(csv_path));
  write_file_atomic(svg_path, render_svg(table));
}

}  // namespace unguide
