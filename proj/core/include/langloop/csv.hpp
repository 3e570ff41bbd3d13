// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace langloop {

/// Rectangular matrix with row/column labels; the interchange form for
/// evaluation matrices and heatmap inputs. CSV layout: first cell empty,
/// then column labels; each row starts with its label.
struct LabeledMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> cells;  // row-major

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  double at(std::size_t r, std::size_t c) const { return cells[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return cells[r * cols() + c]; }

  std::string to_csv() const;
  /// Rejects ragged rows and non-numeric cells with the line number.
  static LabeledMatrix from_csv(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static LabeledMatrix load(const std::filesystem::path& path);
};

/// Round-trippable decimal rendering used in all CSV artifacts.
std::string format_double(double v);

}  // namespace langloop
