#include "denseassoc/associate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "denseassoc/appearance.hpp"
#include "denseassoc/localize.hpp"
#include "denseassoc/motion.hpp"

namespace denseassoc {

Matrix fuse_cost(const Matrix& dist01, const Matrix& sim, double lambda) {
  if (dist01.rows() != sim.rows() || dist01.cols() != sim.cols()) {
    throw std::invalid_argument("fuse_cost: distance matrix " + std::to_string(dist01.rows()) + "x" +
                                std::to_string(dist01.cols()) + " vs similarity " + std::to_string(sim.rows()) + "x" +
                                std::to_string(sim.cols()));
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("fuse_cost: lambda must lie in [0,1]");
  Matrix out(dist01.rows(), dist01.cols());
  for (std::size_t i = 0; i < out.values().size(); ++i)
    out.values()[i] = -lambda * dist01.values()[i] + (1.0 - lambda) * sim.values()[i];
  return out;
}

namespace {

Matching finish(std::vector<std::pair<std::size_t, std::size_t>> pairs, std::size_t p, std::size_t q) {
  std::sort(pairs.begin(), pairs.end());
  Matching m;
  std::vector<char> row_used(p, 0), col_used(q, 0);
  for (auto [r, c] : pairs) {
    row_used[r] = 1;
    col_used[c] = 1;
  }
  m.pairs = std::move(pairs);
  for (std::size_t r = 0; r < p; ++r)
    if (!row_used[r]) m.unmatched_rows.push_back(r);
  for (std::size_t c = 0; c < q; ++c)
    if (!col_used[c]) m.unmatched_cols.push_back(c);
  return m;
}

// Square minimization on the padded cost matrix with dual potentials
// (shortest augmenting path form of the Hungarian method).
struct Hungarian {
  explicit Hungarian(const Matrix& cost) : n(cost.rows()), a(cost), u(n + 1, 0.0), v(n + 1, 0.0), col_row(n + 1, 0) {
    std::vector<std::size_t> way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
      col_row[0] = i;
      std::size_t j0 = 0;
      std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
      std::vector<char> used(n + 1, 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = col_row[j0];
        double delta = std::numeric_limits<double>::infinity();
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n; ++j) {
          if (used[j]) continue;
          const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= n; ++j) {
          if (used[j]) {
            u[col_row[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (col_row[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        col_row[j0] = col_row[j1];
        j0 = j1;
      } while (j0 != 0);
    }
  }

  double reduced(std::size_t i, std::size_t j) const { return a(i, j) - u[i + 1] - v[j + 1]; }

  std::size_t n;
  const Matrix& a;
  std::vector<double> u, v;
  std::vector<std::size_t> col_row;  // 1-based: col_row[j] = row matched to column j
};

}  // namespace

Matching solve_assignment(const Matrix& score) {
  const std::size_t p = score.rows(), q = score.cols();
  if (p == 0 || q == 0) return finish({}, p, q);
  for (double s : score.values())
    if (!std::isfinite(s)) throw std::invalid_argument("solve_assignment: non-finite score");

  const std::size_t n = std::max(p, q);
  Matrix cost(n, n, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) {
      cost(i, j) = -score(i, j);
      scale = std::max(scale, std::abs(score(i, j)));
    }
  const Hungarian h(cost);

  std::vector<std::size_t> row_col(n), col_row(n);
  for (std::size_t j = 1; j <= n; ++j) {
    row_col[h.col_row[j] - 1] = j - 1;
    col_row[j - 1] = h.col_row[j] - 1;
  }

  // Every perfect matching inside the equality subgraph of the optimal duals
  // is optimal. Walk rows in order and move each onto its lexicographically
  // smallest column (real columns first) for which an alternating path keeps
  // the rest of the matching perfect.
  const double tol = 1e-9 * (1.0 + scale);
  auto tight = [&](std::size_t i, std::size_t j) { return h.reduced(i, j) <= tol || row_col[i] == j; };
  std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
  std::vector<char> seen(n);
  std::vector<std::size_t> path_cols;

  // Alternating path from row x to target column, avoiding fixed rows/cols.
  std::function<bool(std::size_t, std::size_t)> dfs = [&](std::size_t x, std::size_t target) -> bool {
    for (std::size_t y = 0; y < n; ++y) {
      if (seen[y] || col_fixed[y] || !tight(x, y)) continue;
      seen[y] = 1;
      if (y == target || (!row_fixed[col_row[y]] && dfs(col_row[y], target))) {
        path_cols.push_back(y);
        return true;
      }
    }
    return false;
  };

  auto try_move = [&](std::size_t i, std::size_t c) -> bool {
    if (row_col[i] == c) return true;
    if (!tight(i, c) || col_fixed[c]) return false;
    const std::size_t displaced = col_row[c];
    const std::size_t freed = row_col[i];
    std::fill(seen.begin(), seen.end(), 0);
    seen[c] = 1;
    row_fixed[i] = 1;
    path_cols.clear();
    const bool ok = dfs(displaced, freed);
    row_fixed[i] = 0;
    if (!ok) return false;
    // path_cols holds the columns visited from `displaced` onward, innermost
    // first; re-thread the matching along the path.
    std::size_t x = displaced;
    std::vector<std::size_t> cols(path_cols.rbegin(), path_cols.rend());
    for (std::size_t y : cols) {
      const std::size_t next_row = col_row[y];
      row_col[x] = y;
      col_row[y] = x;
      x = next_row;
    }
    row_col[i] = c;
    col_row[c] = i;
    return true;
  };

  for (std::size_t i = 0; i < p; ++i) {
    bool placed = false;
    for (std::size_t c = 0; c < n && !placed; ++c) {
      if (c >= q && row_col[i] >= q) {
        placed = true;  // any dummy column is equivalent
        break;
      }
      placed = try_move(i, c);
    }
    row_fixed[i] = 1;
    col_fixed[row_col[i]] = 1;
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < p; ++i)
    if (row_col[i] < q) pairs.emplace_back(i, row_col[i]);
  return finish(std::move(pairs), p, q);
}

Matching solve_greedy(const Matrix& score) {
  const std::size_t p = score.rows(), q = score.cols();
  std::vector<char> used(q, 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < p; ++r) {
    std::size_t best = q;
    for (std::size_t c = 0; c < q; ++c) {
      if (used[c]) continue;
      if (best == q || score(r, c) > score(r, best)) best = c;
    }
    if (best == q) continue;
    used[best] = 1;
    pairs.emplace_back(r, best);
  }
  return finish(std::move(pairs), p, q);
}

double total_score(const Matching& m, const Matrix& score) {
  double total = 0.0;
  for (auto [r, c] : m.pairs) total += score(r, c);
  return total;
}

Matching gate(const Matching& m, const Matrix& score, double gate_score) {
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  for (auto [r, c] : m.pairs) {
    if (r >= score.rows() || c >= score.cols()) throw std::out_of_range("gate: matching does not fit score matrix");
    if (!(score(r, c) < gate_score)) kept.emplace_back(r, c);
  }
  return finish(std::move(kept), score.rows(), score.cols());
}

TrackState start_tracks(const FramePoints& points, int frame) {
  TrackState state;
  Matching all_new;
  for (std::size_t j = 0; j < points.size(); ++j) all_new.unmatched_cols.push_back(j);
  step_tracks(state, all_new, points, frame);
  return state;
}

void step_tracks(TrackState& state, const Matching& matching, const FramePoints& next_points, int frame) {
  if (frame <= state.frame) {
    throw ValidationError("step_tracks: frame " + std::to_string(frame) + " does not follow frame " +
                          std::to_string(state.frame));
  }
  for (auto [r, c] : matching.pairs) {
    if (r >= state.active.size() || c >= next_points.size())
      throw std::out_of_range("step_tracks: pair (" + std::to_string(r) + ", " + std::to_string(c) + ") out of range");
  }
  for (std::size_t c : matching.unmatched_cols)
    if (c >= next_points.size()) throw std::out_of_range("step_tracks: unmatched column out of range");

  std::vector<ActiveTrack> next_active;
  for (auto [r, c] : matching.pairs) {
    ActiveTrack a = state.active[r];
    state.trajectories[a.trajectory].observations.push_back({frame, next_points[c]});
    a.point_index = c;
    next_active.push_back(a);
  }
  for (std::size_t c : matching.unmatched_cols) {
    state.trajectories.push_back({state.next_id++, {{frame, next_points[c]}}});
    next_active.push_back({state.trajectories.size() - 1, c});
  }
  // Trajectories are appended in id order, so their index orders ids.
  std::sort(next_active.begin(), next_active.end(),
            [](const ActiveTrack& a, const ActiveTrack& b) { return a.trajectory < b.trajectory; });
  state.active = std::move(next_active);
  state.frame = frame;
}

std::vector<FramePoints> frame_points(const SceneBundle& bundle, const PipelineConfig& config) {
  if (bundle.points) return *bundle.points;
  std::vector<FramePoints> out;
  out.reserve(bundle.frame_count());
  for (const DensityMap& d : bundle.density) out.push_back(extract_peaks(d, config.peaks));
  return out;
}

std::vector<Trajectory> track_sequence(const SceneBundle& bundle, const PipelineConfig& config) {
  config.validate();
  const std::size_t n = bundle.frame_count();
  if (n == 0) return {};
  if (bundle.motion.size() != n - 1)
    throw ValidationError("expected " + std::to_string(n - 1) + " motion fields, found " +
                          std::to_string(bundle.motion.size()));

  const bool needs_features = config.lambda < 1.0;
  if (needs_features && !bundle.features) {
    throw ConfigError("retrieval backend " + to_string(config.retrieval_backend) +
                      " needs per-frame features but the bundle has none (use --lambda 1 for motion only)");
  }

  const std::vector<FramePoints> points = frame_points(bundle, config);
  TrackState state = start_tracks(points[0], 0);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const FramePoints& next = points[i + 1];
    FramePoints prev;
    prev.reserve(state.active.size());
    for (const ActiveTrack& a : state.active) prev.push_back(state.trajectories[a.trajectory].observations.back().point);

    const FramePoints predicted = predict_prev_positions(next, bundle.motion[i]);
    const Matrix dist01 = rescale01(distance_matrix(prev, predicted));

    Matrix sim(prev.size(), next.size(), 0.0);
    if (needs_features && !prev.empty() && !next.empty()) {
      const FeatureSet& from = (*bundle.features)[i];
      FeatureSet rows(state.active.size(), from.dim());
      for (std::size_t r = 0; r < state.active.size(); ++r) {
        const auto src = from.row(state.active[r].point_index);
        std::copy(src.begin(), src.end(), rows.row(r).begin());
      }
      sim = similarity(config.retrieval_backend, rows, (*bundle.features)[i + 1], config.diffusion);
    }

    const Matrix fused = fuse_cost(dist01, sim, config.lambda);
    const Matching raw = config.matcher == Matcher::hungarian ? solve_assignment(fused) : solve_greedy(fused);
    step_tracks(state, gate(raw, fused, config.gate_score), next, static_cast<int>(i + 1));
  }
  return std::move(state.trajectories);
}

}  // namespace denseassoc
