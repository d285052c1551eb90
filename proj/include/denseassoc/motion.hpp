#pragma once

// Motion-and-position maps (MPM): encoding ground-truth displacements into a
// per-pixel field, decoding offsets at detections, predicting where each
// detection was one frame earlier, and the detection-to-prediction distance
// matrix.

#include <optional>
#include <utility>
#include <vector>

#include "denseassoc/parallel.hpp"
#include "denseassoc/types.hpp"

namespace denseassoc {

struct MpmParams {
  double sigma = 3.0;
  double radius = 9.0;
};

/// Pixels with vz at or below this carry no motion evidence.
inline constexpr double kMotionEpsZ = 1e-6;

struct Offset {
  double dx = 0.0;
  double dy = 0.0;
};

/// correspondence[j] is the index into prev_points of next_points[j]'s
/// predecessor, or nullopt for an individual without one (left unencoded).
/// Around each encoded individual, pixels within `radius` store
/// L * (d_x, d_y, 1) / |(d_x, d_y, 1)| with d = prev - next and
/// L = exp(-r^2 / (2 sigma^2)); overlapping individuals resolve to the larger
/// L, the lower index winning exact ties.
MotionField encode_mpm(const FramePoints& prev_points, const FramePoints& next_points,
                       const std::vector<std::optional<std::size_t>>& correspondence, const MpmParams& params,
                       std::size_t height, std::size_t width, Exec exec = Exec::parallel);

/// Reads the nearest pixel; (vx/vz, vy/vz) where vz > kMotionEpsZ, else (0,0).
/// Throws std::out_of_range for points outside [0,width) x [0,height).
Offset decode_offset(const MotionField& field, const Point& point);

/// predicted[j] = next[j] + decoded offset, clamped to the field bounds. The
/// score is carried over.
FramePoints predict_prev_positions(const FramePoints& next_points, const MotionField& field);

/// Entry (k, j) is the Euclidean distance between prev_points[k] and
/// predicted[j].
Matrix distance_matrix(const FramePoints& prev_points, const FramePoints& predicted, Exec exec = Exec::parallel);

/// Min-max rescale into [0,1]; a constant matrix maps to `degenerate_value`.
Matrix rescale01(const Matrix& m, double degenerate_value = 0.0);

}  // namespace denseassoc
