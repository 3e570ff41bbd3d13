// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "langloop/csv.hpp"

namespace langloop {

/// Diverging color scale anchored at a midpoint: values above map toward the
/// cool end (blue), values below toward the warm end (red). NaN cells render
/// gray. Output bytes are deterministic for a fixed input.
struct HeatmapStyle {
  /// Scale midpoint. Unset = automatic: 0 when the data spans both signs
  /// (transfer deltas), else the data mean (raw score matrices).
  std::optional<double> midpoint;
  std::string title;
  double cell_size = 28.0;
};

std::string render_heatmap_svg(const LabeledMatrix& matrix,
                               const HeatmapStyle& style = {});

/// Fill color for one value under the scale; exposed for tests.
std::string heatmap_fill(double value, double lo, double mid, double hi);

}  // namespace langloop
