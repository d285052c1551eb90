#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Each is written for clarity over speed and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "denseassoc/types.hpp"

namespace oracle {

using denseassoc::DensityMap;
using denseassoc::FeatureSet;
using denseassoc::FramePoints;
using denseassoc::Matrix;
using denseassoc::Point;

/// Maximum total over every matching of size min(p, q), by enumerating
/// column permutations.
inline double best_assignment(const Matrix& m) {
  const bool flip = m.rows() > m.cols();
  const std::size_t p = flip ? m.cols() : m.rows(), q = flip ? m.rows() : m.cols();
  auto at = [&](std::size_t r, std::size_t c) { return flip ? m(c, r) : m(r, c); };
  std::vector<std::size_t> perm(q);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -INFINITY;
  do {
    double s = 0.0;
    for (std::size_t r = 0; r < p; ++r) s += at(r, perm[r]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return p == 0 ? 0.0 : best;
}

/// Strictly greater than every other pixel of the clipped window.
inline bool strict_local_max(const DensityMap& map, std::size_t r, std::size_t c, int window) {
  const long half = window / 2;
  const float v = map.at(r, c);
  for (long dr = -half; dr <= half; ++dr) {
    for (long dc = -half; dc <= half; ++dc) {
      const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
      if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= static_cast<long>(map.height()) ||
          cc >= static_cast<long>(map.width()))
        continue;
      if (map.at(rr, cc) >= v) return false;
    }
  }
  return true;
}

/// Peaks for maps without equal-valued neighbours, by exhaustive scan in
/// row-major order.
inline FramePoints naive_peaks(const DensityMap& map, const denseassoc::PeakParams& params) {
  float mx = 0.0f;
  for (float v : map.values()) mx = std::max(mx, v);
  const double floor = std::max(params.abs_threshold, params.rel_threshold * mx);
  FramePoints out;
  for (std::size_t r = 0; r < map.height(); ++r) {
    for (std::size_t c = 0; c < map.width(); ++c) {
      const float v = map.at(r, c);
      if (v > 0.0f && v >= floor && strict_local_max(map, r, c, params.window))
        out.push_back({double(c), double(r), std::min(1.0, double(v))});
    }
  }
  return out;
}

/// Area under the step precision-recall curve: sum over ranks of
/// (recall gained at that rank) * (precision at that rank).
inline double pr_area(const std::vector<bool>& hits, std::size_t gt_total) {
  if (gt_total == 0) return hits.empty() ? 1.0 : 0.0;
  std::vector<std::pair<double, double>> curve;  // (recall, precision)
  std::size_t tp = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    tp += hits[i] ? 1 : 0;
    curve.emplace_back(double(tp) / double(gt_total), double(tp) / double(i + 1));
  }
  double area = 0.0, last_recall = 0.0;
  for (const auto& [rec, prec] : curve) {
    area += (rec - last_recall) * prec;
    last_recall = rec;
  }
  return area;
}

/// Dense diffusion scores of every union node for one query, by Gaussian
/// elimination on (I - alpha S).
inline std::vector<double> dense_diffusion(const FeatureSet& prev, const FeatureSet& next,
                                           const denseassoc::DiffusionParams& params, std::size_t query) {
  const std::size_t p = prev.count(), n = p + next.count();
  std::vector<std::vector<double>> x(n);
  for (std::size_t u = 0; u < n; ++u) {
    auto row = u < p ? prev.row(u) : next.row(u - p);
    x[u].assign(row.begin(), row.end());
  }
  auto cosine = [&](std::size_t a, std::size_t b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < x[a].size(); ++i) {
      d += x[a][i] * x[b][i];
      na += x[a][i] * x[a][i];
      nb += x[b][i] * x[b][i];
    }
    return (na == 0 || nb == 0) ? 0.0 : std::clamp(d / std::sqrt(na * nb), -1.0, 1.0);
  };
  const std::size_t k = std::min<std::size_t>(params.knn_k, n - 1);
  std::vector<std::vector<bool>> nn(n, std::vector<bool>(n, false));
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t v = 0; v < n; ++v)
      if (v != u) cand.emplace_back(-cosine(u, v), v);
    std::sort(cand.begin(), cand.end());
    for (std::size_t i = 0; i < k; ++i) nn[u][cand[i].second] = true;
  }
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  std::vector<double> deg(n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && nn[u][v] && nn[v][u]) {
        w[u][v] = std::pow(std::max(0.0, cosine(u, v)), params.gamma);
        deg[u] += w[u][v];
      }
  // Augmented system [I - alpha S | e_query].
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const double s = (deg[u] > 0 && deg[v] > 0) ? w[u][v] / std::sqrt(deg[u] * deg[v]) : 0.0;
      a[u][v] = (u == v ? 1.0 : 0.0) - params.alpha * s;
    }
    a[u][n] = u == query ? 1.0 : 0.0;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t cc = c; cc <= n; ++cc) a[r][cc] -= f * a[c][cc];
    }
  }
  std::vector<double> f(n);
  for (std::size_t u = 0; u < n; ++u) f[u] = a[u][n] / a[u][u];
  return f;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t p, std::size_t q, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(p, q);
  for (double& v : m.values()) v = u(rng);
  return m;
}

inline FeatureSet random_features(std::mt19937_64& rng, std::size_t count, std::size_t dim) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  FeatureSet f(count, dim);
  for (float& v : f.values()) v = g(rng);
  return f;
}

/// Unit-amplitude isotropic Gaussian blobs, evaluated at every pixel.
inline DensityMap gaussian_blobs(const std::vector<std::pair<double, double>>& centers, double sigma, std::size_t h,
                                 std::size_t w) {
  DensityMap m(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (const auto& [x, y] : centers) s += std::exp(-((c - x) * (c - x) + (r - y) * (r - y)) / (2 * sigma * sigma));
      m.at(r, c) = static_cast<float>(s);
    }
  return m;
}

}  // namespace oracle
