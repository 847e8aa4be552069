// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

// Published CIFAR-10 object-erasure scores in percent, two decimals.

namespace unguide::acceptance {

struct HoRow {
  const char* method;
  const char* erased;
  double acc_e;
  double acc_s;
  double acc_g;
  double h_o;
};

inline constexpr std::array<HoRow, 80> kHoRows{{
    {"FMN", "airplane", 96.76, 98.32, 94.15, 6.13},
    {"FMN", "deer", 98.95, 94.13, 60.24, 3.04},
    {"FMN", "ship", 97.97, 98.21, 96.75, 3.70},
    {"AC", "airplane", 96.24, 98.55, 93.35, 6.11},
    {"AC", "deer", 99.45, 98.47, 64.78, 1.62},
    {"AC", "ship", 98.18, 98.50, 77.47, 4.97},
    {"UCE", "airplane", 40.32, 98.79, 49.83, 64.09},
    {"UCE", "deer", 11.88, 98.39, 8.94, 92.34},
    {"UCE", "ship", 6.13, 98.41, 21.44, 89.44},
    {"SLD-M", "airplane", 91.37, 98.86, 89.26, 13.69},
    {"SLD-M", "deer", 57.62, 98.45, 39.91, 59.53},
    {"SLD-M", "ship", 89.24, 98.56, 41.02, 24.99},
    {"ESD-x", "airplane", 33.11, 97.15, 32.28, 74.98},
    {"ESD-x", "deer", 19.01, 96.98, 10.19, 88.77},
    {"ESD-x", "ship", 33.35, 97.93, 34.78, 73.99},
    {"ESD-u", "airplane", 7.38, 85.48, 5.92, 90.57},
    {"ESD-u", "deer", 18.14, 73.81, 6.93, 82.17},
    {"ESD-u", "ship", 18.38, 94.32, 15.93, 86.33},
    {"MACE", "airplane", 9.06, 95.39, 10.03, 92.03},
    {"MACE", "deer", 13.47, 97.71, 6.08, 92.48},
    {"MACE", "ship", 8.49, 97.35, 10.53, 92.61},
    {"Ours", "airplane", 2.69, 98.98, 2.73, 97.85},
    {"Ours", "deer", 2.34, 98.57, 4.99, 97.06},
    {"Ours", "ship", 3.64, 98.80, 4.89, 96.73},
    {"FMN", "automobile", 95.08, 96.86, 79.45, 11.44},
    {"FMN", "bird", 99.46, 98.13, 96.75, 1.38},
    {"FMN", "cat", 94.89, 97.97, 95.71, 6.83},
    {"AC", "automobile", 94.41, 98.47, 73.92, 13.19},
    {"AC", "bird", 99.55, 98.53, 94.57, 1.24},
    {"AC", "cat", 98.94, 98.63, 99.10, 1.45},
    {"UCE", "automobile", 4.73, 99.02, 37.25, 82.12},
    {"UCE", "bird", 10.71, 98.35, 15.97, 90.18},
    {"UCE", "cat", 2.35, 98.02, 2.58, 97.70},
    {"SLD-M", "automobile", 84.89, 98.86, 66.15, 28.34},
    {"SLD-M", "bird", 80.72, 98.39, 85.00, 23.31},
    {"SLD-M", "cat", 88.56, 98.43, 92.17, 13.31},
    {"ESD-x", "automobile", 59.68, 98.39, 58.83, 50.62},
    {"ESD-x", "bird", 18.57, 97.24, 40.55, 76.17},
    {"ESD-x", "cat", 12.51, 97.52, 21.91, 86.98},
    {"ESD-u", "automobile", 30.29, 91.02, 32.12, 74.88},
    {"ESD-u", "bird", 13.17, 86.17, 20.65, 83.98},
    {"ESD-u", "cat", 11.77, 91.45, 13.50, 88.68},
    {"MACE", "automobile", 6.97, 95.18, 14.22, 91.15},
    {"MACE", "bird", 9.88, 97.45, 15.48, 90.39},
    {"MACE", "cat", 2.22, 98.85, 3.91, 97.56},
    {"Ours", "automobile", 1.83, 97.95, 5.32, 96.91},
    {"Ours", "bird", 16.03, 98.70, 18.30, 88.33},
    {"Ours", "cat", 2.98, 98.80, 2.66, 97.71},
    {"FMN", "dog", 97.64, 98.12, 96.95, 3.94},
    {"FMN", "frog", 91.60, 94.59, 63.61, 19.10},
    {"FMN", "horse", 99.63, 93.14, 46.61, 1.10},
    {"FMN", "truck", 97.64, 97.86, 95.37, 4.62},
    {"AC", "dog", 98.50, 98.57, 95.76, 3.29},
    {"AC", "frog", 99.92, 98.62, 92.44, 0.24},
    {"AC", "horse", 99.74, 98.63, 45.29, 0.77},
    {"AC", "truck", 98.50, 98.61, 95.12, 3.40},
    {"UCE", "dog", 13.22, 98.69, 14.63, 89.90},
    {"UCE", "frog", 20.86, 98.32, 18.50, 85.53},
    {"UCE", "horse", 4.66, 98.32, 12.70, 93.42},
    {"UCE", "truck", 20.58, 98.16, 50.00, 70.13},
    {"SLD-M", "dog", 94.27, 98.53, 82.84, 12.35},
    {"SLD-M", "frog", 81.92, 98.19, 59.78, 33.20},
    {"SLD-M", "horse", 81.76, 98.44, 36.71, 37.14},
    {"SLD-M", "truck", 91.06, 98.72, 80.62, 17.29},
    {"ESD-x", "dog", 28.54, 96.38, 44.49, 70.78},
    {"ESD-x", "frog", 11.56, 97.37, 13.73, 90.45},
    {"ESD-x", "horse", 16.86, 97.02, 15.05, 87.96},
    {"ESD-x", "truck", 36.06, 97.24, 44.29, 68.38},
    {"ESD-u", "dog", 27.03, 89.75, 28.52, 77.24},
    {"ESD-u", "frog", 12.32, 88.05, 7.62, 89.32},
    {"ESD-u", "horse", 17.69, 82.23, 9.89, 84.73},
    {"ESD-u", "truck", 26.11, 85.35, 21.47, 78.98},
    {"MACE", "dog", 6.97, 95.18, 14.22, 91.15},
    {"MACE", "frog", 9.88, 97.45, 15.48, 90.39},
    {"MACE", "horse", 2.22, 98.85, 3.91, 97.56},
    {"MACE", "truck", 8.49, 97.35, 10.53, 92.61},
    {"Ours", "dog", 12.16, 98.87, 11.54, 91.45},
    {"Ours", "frog", 7.65, 98.63, 6.45, 94.77},
    {"Ours", "horse", 5.32, 98.69, 12.80, 93.28},
    {"Ours", "truck", 10.77, 98.56, 7.09, 93.41},
}};

// Ten-class averages of the H_o column.
struct HoAverage {
  const char* method;
  double h_o;
};

inline constexpr std::array<HoAverage, 8> kHoAverages{{
    {"FMN", 6.13},
    {"AC", 3.63},
    {"UCE", 85.48},
    {"SLD-M", 26.32},
    {"ESD-x", 76.91},
    {"ESD-u", 83.69},
    {"MACE", 92.61},
    {"Ours", 94.77},
}};

}  // namespace unguide::acceptance
