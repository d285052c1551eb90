#pragma once

// Density-peak localization: individuals are the local maxima of a density
// map above a threshold.

#include "denseassoc/parallel.hpp"
#include "denseassoc/types.hpp"

namespace denseassoc {

/// Returns every pixel that is the maximum of its window x window
/// neighborhood (clipped at the borders) and whose value reaches
/// max(abs_threshold, rel_threshold * global max). Plateaus (equal-valued
/// pixels within one window of each other) yield a single peak at their
/// lexicographically smallest (y, x) pixel, and only when no pixel in the
/// window of any plateau member is larger. Scores are the density value
/// clamped to [0, 1]; output is sorted by (y, x).
///
/// Throws ConfigError if the window is even or smaller than 3, or a threshold
/// is negative.
FramePoints extract_peaks(const DensityMap& map, const PeakParams& params, Exec exec = Exec::parallel);

std::size_t count_peaks(const DensityMap& map, const PeakParams& params, Exec exec = Exec::parallel);

}  // namespace denseassoc
