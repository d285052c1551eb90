#pragma once

// Appearance cues: patch geometry around detections, feature flattening, and
// the three similarity backends (cosine, Euclidean, diffusion retrieval).
// Every backend returns a p x q matrix with entries in [0, 1].

#include <vector>

#include "denseassoc/parallel.hpp"
#include "denseassoc/types.hpp"

namespace denseassoc {

inline constexpr int kDefaultPatchSize = 20;

struct Patch {
  int side = 0;
  std::size_t source_index = 0;
  // Top-left corner of the window in image coordinates.
  std::size_t origin_x = 0;
  std::size_t origin_y = 0;
  Image pixels;
};

/// size x size window centered on the rounded point (center pixel at offset
/// size/2), shifted inward when it would cross a border. Throws
/// std::invalid_argument if size < 1 or exceeds an image dimension, and
/// std::out_of_range if the point lies outside the image.
Patch crop_patch(const Image& image, const Point& point, int size = kDefaultPatchSize,
                 std::size_t source_index = 0);

/// Row-major flattening of a (rows x cols) feature grid.
std::vector<float> flatten(const Grid<float>& matrix);
Grid<float> reshape(const std::vector<float>& flat, std::size_t rows, std::size_t cols);

/// Raw cosine; 0 when either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

/// (1 + cos) / 2. Throws std::invalid_argument on dimension mismatch.
Matrix similarity_cosine(const FeatureSet& prev, const FeatureSet& next, Exec exec = Exec::parallel);

/// 1 / (1 + |a - b|).
Matrix similarity_euclidean(const FeatureSet& prev, const FeatureSet& next, Exec exec = Exec::parallel);

// Diffusion retrieval over the union of both frames' vectors.
//
// Affinities W_uv = max(0, cos)^gamma are kept only between mutual k-nearest
// neighbors, normalized as S = D^-1/2 W D^-1/2, and each next-frame item j is
// scored against the previous frame by solving (I - alpha S) f = e_j with
// conjugate gradients.

struct DiffusionGraph {
  std::size_t n = 0;
  // CSR storage of S (symmetric).
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> val;
};

DiffusionGraph build_diffusion_graph(const FeatureSet& prev, const FeatureSet& next, const DiffusionParams& params);

/// y = (I - alpha S) x
void apply_diffusion_operator(const DiffusionGraph& g, double alpha, std::span<const double> x, std::span<double> y);

struct DiffusionSolve {
  std::vector<double> f;
  double residual = 0.0;  // |(I - alpha S) f - e|_2, recomputed after the solve
  int iterations = 0;
};

/// Throws NumericError (carrying the residual) if the solve does not reach
/// params.tolerance within params.max_iterations, or the recomputed residual
/// exceeds 1e-6.
DiffusionSolve solve_diffusion(const DiffusionGraph& g, std::size_t query, const DiffusionParams& params);

/// Raw scores f*(k) for k < p, then min-max rescaled over the whole matrix
/// (all-equal maps to 0.5).
Matrix similarity_diffusion(const FeatureSet& prev, const FeatureSet& next, const DiffusionParams& params,
                            Exec exec = Exec::parallel);

Matrix similarity(RetrievalBackend backend, const FeatureSet& prev, const FeatureSet& next,
                  const DiffusionParams& params, Exec exec = Exec::parallel);

}  // namespace denseassoc
