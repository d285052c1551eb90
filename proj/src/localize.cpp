#include "denseassoc/localize.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace denseassoc {

namespace {

enum : std::uint8_t { kNoGreater = 1, kHasTie = 2 };

// Flags one row: whether any pixel in the clipped window is larger, and
// whether any other pixel in it is equal.
void flag_row(const DensityMap& map, int half, std::size_t r, std::vector<std::uint8_t>& flags) {
  const int h = static_cast<int>(map.height()), w = static_cast<int>(map.width());
  const int y = static_cast<int>(r);
  const int y0 = std::max(0, y - half), y1 = std::min(h - 1, y + half);
  for (int x = 0; x < w; ++x) {
    const float v = map.at(r, x);
    const int x0 = std::max(0, x - half), x1 = std::min(w - 1, x + half);
    bool greater = false, tie = false;
    for (int yy = y0; yy <= y1 && !greater; ++yy) {
      for (int xx = x0; xx <= x1; ++xx) {
        if (yy == y && xx == x) continue;
        const float u = map.at(yy, xx);
        if (u > v) {
          greater = true;
          break;
        }
        if (u == v) tie = true;
      }
    }
    std::uint8_t f = 0;
    if (!greater) f |= kNoGreater;
    if (tie) f |= kHasTie;
    flags[r * w + x] = f;
  }
}

}  // namespace

FramePoints extract_peaks(const DensityMap& map, const PeakParams& params, Exec exec) {
  if (params.window < 3 || params.window % 2 == 0)
    throw ConfigError("peak window must be odd and >= 3, got " + std::to_string(params.window));
  if (params.rel_threshold < 0.0 || params.abs_threshold < 0.0) throw ConfigError("peak thresholds must be >= 0");

  const std::size_t h = map.height(), w = map.width();
  if (map.empty()) return {};

  float global_max = 0.0f;
  const auto& vals = map.values();
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(vals.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(max : global_max) schedule(static)
    for (std::ptrdiff_t i = 0; i < total; ++i) global_max = std::max(global_max, vals[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < total; ++i) global_max = std::max(global_max, vals[i]);
  }
  const double threshold = std::max(params.abs_threshold, params.rel_threshold * static_cast<double>(global_max));

  const int half = params.window / 2;
  std::vector<std::uint8_t> flags(h * w, 0);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(h);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) flag_row(map, half, static_cast<std::size_t>(r), flags);
  } else {
    for (std::ptrdiff_t r = 0; r < rows; ++r) flag_row(map, half, static_cast<std::size_t>(r), flags);
  }

  auto qualifies = [&](std::size_t idx) {
    const float v = vals[idx];
    return v > 0.0f && static_cast<double>(v) >= threshold && (flags[idx] & kNoGreater);
  };

  FramePoints peaks;
  std::vector<std::uint8_t> visited(h * w, 0);
  std::vector<std::size_t> stack;
  for (std::size_t idx = 0; idx < h * w; ++idx) {
    if (!qualifies(idx)) continue;
    if (!(flags[idx] & kHasTie)) {
      peaks.push_back({static_cast<double>(idx % w), static_cast<double>(idx / w), std::min(1.0, double(vals[idx]))});
      continue;
    }
    if (visited[idx]) continue;

    // Plateau: equal-valued pixels linked through the window neighborhood.
    const float v = vals[idx];
    bool all_max = true;
    std::size_t first = idx;
    stack.assign(1, idx);
    visited[idx] = 1;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      first = std::min(first, cur);
      if (!(flags[cur] & kNoGreater)) all_max = false;
      const int cy = static_cast<int>(cur / w), cx = static_cast<int>(cur % w);
      for (int yy = std::max(0, cy - half); yy <= std::min(int(h) - 1, cy + half); ++yy) {
        for (int xx = std::max(0, cx - half); xx <= std::min(int(w) - 1, cx + half); ++xx) {
          const std::size_t n = static_cast<std::size_t>(yy) * w + xx;
          if (!visited[n] && vals[n] == v) {
            visited[n] = 1;
            stack.push_back(n);
          }
        }
      }
    }
    if (all_max) {
      peaks.push_back({static_cast<double>(first % w), static_cast<double>(first / w), std::min(1.0, double(v))});
    }
  }

  std::sort(peaks.begin(), peaks.end(), [](const Point& a, const Point& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return peaks;
}

std::size_t count_peaks(const DensityMap& map, const PeakParams& params, Exec exec) {
  return extract_peaks(map, params, exec).size();
}

}  // namespace denseassoc
