#include "denseassoc/appearance.hpp"

#include "denseassoc/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace denseassoc {

Patch crop_patch(const Image& image, const Point& point, int size, std::size_t source_index) {
  if (size < 1) throw std::invalid_argument("crop_patch: size must be >= 1");
  const auto side = static_cast<std::size_t>(size);
  if (side > image.width() || side > image.height()) {
    throw std::invalid_argument("crop_patch: size " + std::to_string(size) + " exceeds image " +
                                std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
  if (!(point.x >= 0.0 && point.y >= 0.0 && point.x < double(image.width()) && point.y < double(image.height())))
    throw std::out_of_range("crop_patch: point outside image");

  const auto cx = static_cast<long>(std::min<double>(std::lround(point.x), image.width() - 1.0));
  const auto cy = static_cast<long>(std::min<double>(std::lround(point.y), image.height() - 1.0));
  const long half = size / 2;
  const long max_x0 = static_cast<long>(image.width() - side), max_y0 = static_cast<long>(image.height() - side);
  const auto x0 = static_cast<std::size_t>(std::clamp(cx - half, 0L, max_x0));
  const auto y0 = static_cast<std::size_t>(std::clamp(cy - half, 0L, max_y0));

  Patch p{size, source_index, x0, y0, Image(side, side)};
  for (std::size_t r = 0; r < side; ++r) {
    const auto src = image.row(y0 + r).subspan(x0, side);
    std::copy(src.begin(), src.end(), p.pixels.row(r).begin());
  }
  return p;
}

std::vector<float> flatten(const Grid<float>& matrix) {
  if (matrix.empty()) throw std::invalid_argument("flatten: empty matrix");
  return matrix.values();
}

Grid<float> reshape(const std::vector<float>& flat, std::size_t rows, std::size_t cols) {
  if (flat.size() != rows * cols) throw std::invalid_argument("reshape: size mismatch");
  Grid<float> g(rows, cols);
  g.values() = flat;
  return g;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * double(b[i]);
    na += double(a[i]) * double(a[i]);
    nb += double(b[i]) * double(b[i]);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

namespace {

void check_dims(const FeatureSet& a, const FeatureSet& b) {
  if (a.count() > 0 && b.count() > 0 && a.dim() != b.dim()) {
    throw std::invalid_argument("feature dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
}

template <class F>
Matrix pairwise(const FeatureSet& prev, const FeatureSet& next, Exec exec, F&& entry) {
  check_dims(prev, next);
  Matrix m(prev.count(), next.count());
  const auto rows = static_cast<std::ptrdiff_t>(prev.count());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < rows; ++k)
      for (std::size_t j = 0; j < next.count(); ++j) m(k, j) = entry(prev.row(k), next.row(j));
  } else {
    for (std::ptrdiff_t k = 0; k < rows; ++k)
      for (std::size_t j = 0; j < next.count(); ++j) m(k, j) = entry(prev.row(k), next.row(j));
  }
  return m;
}

}  // namespace

Matrix similarity_cosine(const FeatureSet& prev, const FeatureSet& next, Exec exec) {
  return pairwise(prev, next, exec,
                  [](std::span<const float> a, std::span<const float> b) { return 0.5 * (1.0 + cosine(a, b)); });
}

Matrix similarity_euclidean(const FeatureSet& prev, const FeatureSet& next, Exec exec) {
  return pairwise(prev, next, exec, [](std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = double(a[i]) - double(b[i]);
      s += d * d;
    }
    return 1.0 / (1.0 + std::sqrt(s));
  });
}

DiffusionGraph build_diffusion_graph(const FeatureSet& prev, const FeatureSet& next, const DiffusionParams& params) {
  check_dims(prev, next);
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw std::invalid_argument("diffusion alpha must lie in (0,1)");
  if (params.knn_k < 1) throw std::invalid_argument("diffusion knn_k must be >= 1");

  const std::size_t p = prev.count(), n = p + next.count();
  auto vec = [&](std::size_t u) { return u < p ? prev.row(u) : next.row(u - p); };

  Matrix cos(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) cos(u, v) = cos(v, u) = cosine(vec(u), vec(v));

  // k nearest neighbors by cosine, ties to the lower index.
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.knn_k), n > 0 ? n - 1 : 0);
  std::vector<std::vector<char>> is_nn(n, std::vector<char>(n, 0));
  std::vector<std::size_t> order;
  for (std::size_t u = 0; u < n; ++u) {
    order.clear();
    for (std::size_t v = 0; v < n; ++v)
      if (v != u) order.push_back(v);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return cos(u, a) != cos(u, b) ? cos(u, a) > cos(u, b) : a < b; });
    for (std::size_t i = 0; i < k; ++i) is_nn[u][order[i]] = 1;
  }

  Matrix w(n, n);
  std::vector<double> degree(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v || !is_nn[u][v] || !is_nn[v][u]) continue;
      w(u, v) = std::pow(std::max(0.0, cos(u, v)), params.gamma);
      degree[u] += w(u, v);
    }
  }

  DiffusionGraph g;
  g.n = n;
  g.row_start.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (w(u, v) == 0.0 || degree[u] == 0.0 || degree[v] == 0.0) continue;
      g.col.push_back(v);
      g.val.push_back(w(u, v) / (std::sqrt(degree[u]) * std::sqrt(degree[v])));
    }
    g.row_start[u + 1] = g.col.size();
  }
  return g;
}

void apply_diffusion_operator(const DiffusionGraph& g, double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t u = 0; u < g.n; ++u) {
    double s = 0.0;
    for (std::size_t e = g.row_start[u]; e < g.row_start[u + 1]; ++e) s += g.val[e] * x[g.col[e]];
    y[u] = x[u] - alpha * s;
  }
}

DiffusionSolve solve_diffusion(const DiffusionGraph& g, std::size_t query, const DiffusionParams& params) {
  if (query >= g.n) throw std::out_of_range("solve_diffusion: query index out of range");
  const std::size_t n = g.n;
  DiffusionSolve out;
  out.f.assign(n, 0.0);
  std::vector<double> r(n, 0.0), p(n, 0.0), ap(n, 0.0);
  r[query] = 1.0;
  p[query] = 1.0;
  double rr = 1.0;
  const double tol_sq = params.tolerance * params.tolerance;

  int it = 0;
  while (rr > tol_sq && it < params.max_iterations) {
    apply_diffusion_operator(g, params.alpha, p, ap);
    const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
    if (!(pap > 0.0)) break;
    const double step = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      out.f[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    const double rr_next = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    ++it;
  }
  out.iterations = it;

  apply_diffusion_operator(g, params.alpha, out.f, ap);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ap[i] - (i == query ? 1.0 : 0.0);
    res += d * d;
  }
  out.residual = std::sqrt(res);
  if (rr > tol_sq || out.residual > 1e-6) {
    throw NumericError("diffusion solve for query " + std::to_string(query) + " did not converge after " +
                       std::to_string(it) + " iterations (residual " + std::to_string(out.residual) + ")");
  }
  return out;
}

Matrix similarity_diffusion(const FeatureSet& prev, const FeatureSet& next, const DiffusionParams& params,
                            Exec exec) {
  const DiffusionGraph g = build_diffusion_graph(prev, next, params);
  const std::size_t p = prev.count(), q = next.count();
  Matrix raw(p, q);
  if (p == 0 || q == 0) return raw;

  const auto queries = static_cast<std::ptrdiff_t>(q);
  auto solve_column = [&](std::ptrdiff_t j) {
    const DiffusionSolve s = solve_diffusion(g, p + static_cast<std::size_t>(j), params);
    for (std::size_t k = 0; k < p; ++k) raw(k, j) = s.f[k];
  };
  if (exec == Exec::parallel) {
    // Exceptions must not cross the OpenMP region boundary.
    std::vector<std::string> errors(q);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t j = 0; j < queries; ++j) {
      try {
        solve_column(j);
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) throw NumericError(e);
  } else {
    for (std::ptrdiff_t j = 0; j < queries; ++j) solve_column(j);
  }

  return rescale01(raw, 0.5);
}

Matrix similarity(RetrievalBackend backend, const FeatureSet& prev, const FeatureSet& next,
                  const DiffusionParams& params, Exec exec) {
  switch (backend) {
    case RetrievalBackend::cosine: return similarity_cosine(prev, next, exec);
    case RetrievalBackend::euclidean: return similarity_euclidean(prev, next, exec);
    case RetrievalBackend::diffusion: return similarity_diffusion(prev, next, params, exec);
  }
  throw std::invalid_argument("unknown retrieval backend");
}

}  // namespace denseassoc
