#pragma once

// Inter-frame association: motion/appearance cost fusion, optimal bipartite
// matching, gating, and trajectory bookkeeping.
//
// Scores are higher-is-better throughout; the fused score of a pair is
// -lambda * rescaled_distance + (1 - lambda) * similarity.

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "denseassoc/types.hpp"

namespace denseassoc {

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), sorted by row
  std::vector<std::size_t> unmatched_rows;                 // ascending
  std::vector<std::size_t> unmatched_cols;                 // ascending
};

/// Throws std::invalid_argument on shape mismatch or lambda outside [0,1].
Matrix fuse_cost(const Matrix& dist01, const Matrix& sim, double lambda);

/// Maximum-total-score matching of size min(p, q). Among optimal matchings
/// the one whose row-sorted pair sequence is lexicographically smallest is
/// returned.
Matching solve_assignment(const Matrix& score);

/// Rows in ascending order each take their best still-unused column (lowest
/// column on ties). Ablation baseline for the optimal solver.
Matching solve_greedy(const Matrix& score);

double total_score(const Matching& m, const Matrix& score);

/// Dissolves pairs whose score is below gate_score.
Matching gate(const Matching& m, const Matrix& score, double gate_score);

struct ActiveTrack {
  std::size_t trajectory = 0;  // index into TrackState::trajectories
  std::size_t point_index = 0; // index of the last observation in its frame
};

struct TrackState {
  std::vector<Trajectory> trajectories;  // every trajectory ever started, by id
  std::vector<ActiveTrack> active;       // ascending id; rows of the next cost matrix
  std::int64_t next_id = 0;
  int frame = -1;                        // last frame added
};

/// Starts one trajectory per point (ids 0..k-1).
TrackState start_tracks(const FramePoints& points, int frame);

/// Extends matched tracks (rows index state.active), starts a fresh id for
/// every unmatched column, and retires every unmatched row. Throws
/// std::out_of_range on bad indices or ValidationError unless frame is later
/// than the last one added.
void step_tracks(TrackState& state, const Matching& matching, const FramePoints& next_points, int frame);

/// Runs localization (when the bundle carries no points) and association over
/// every consecutive frame pair. Returns all trajectories sorted by id.
/// Throws ConfigError when the configuration needs features the bundle lacks.
std::vector<Trajectory> track_sequence(const SceneBundle& bundle, const PipelineConfig& config);

/// Per-frame points used by track_sequence: bundle points if present,
/// otherwise density peaks.
std::vector<FramePoints> frame_points(const SceneBundle& bundle, const PipelineConfig& config);

}  // namespace denseassoc
