#pragma once

// Domain types shared by every stage of the tracker.
//
// Coordinates: x is the column, y is the row, origin at the top-left corner,
// pixel centers at integer coordinates. Grids are stored row-major.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace denseassoc {

// Error taxonomy. The CLI maps these onto exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  const T& at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * width_, width_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * width_, width_}; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

using DensityMap = Grid<float>;

// Dense p x q matrix of doubles; rows index the earlier frame.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& values() const { return data_; }
  std::vector<double>& values() { return data_; }

  Matrix transposed() const;
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Image = Grid<std::uint8_t>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};
using RgbImage = Grid<Rgb>;

struct Point {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
  bool operator==(const Point&) const = default;
};

using FramePoints = std::vector<Point>;

// Encoded motion: per pixel v = L * (dx, dy, 1) / |(dx, dy, 1)|, three planes.
class MotionField {
 public:
  MotionField() = default;
  MotionField(std::size_t height, std::size_t width)
      : vx(height, width), vy(height, width), vz(height, width) {}

  std::size_t height() const { return vz.height(); }
  std::size_t width() const { return vz.width(); }

  bool operator==(const MotionField&) const = default;

  Grid<float> vx, vy, vz;
};

class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(std::size_t count, std::size_t dim) : count_(count), dim_(dim), data_(count * dim, 0.0f) {}

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }

  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }

  bool operator==(const FeatureSet&) const = default;

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct Observation {
  int frame = 0;
  Point point;
  bool operator==(const Observation&) const = default;
};

struct Trajectory {
  std::int64_t id = 0;
  std::vector<Observation> observations;
  bool operator==(const Trajectory&) const = default;
};

// Motion field k describes frame k -> k+1 and is stored on disk under the
// later frame's index (k+1).
struct SceneBundle {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<DensityMap> density;
  std::optional<std::vector<FramePoints>> points;
  std::optional<std::vector<FeatureSet>> features;
  std::vector<MotionField> motion;
  std::optional<std::vector<Image>> images;

  std::size_t frame_count() const { return density.size(); }
  bool operator==(const SceneBundle&) const = default;
};

enum class RetrievalBackend { diffusion, cosine, euclidean };
enum class Matcher { hungarian, greedy };

std::string to_string(RetrievalBackend b);
std::string to_string(Matcher m);
RetrievalBackend parse_backend(const std::string& s);
Matcher parse_matcher(const std::string& s);

struct PeakParams {
  int window = 3;
  double rel_threshold = 0.3;
  double abs_threshold = 0.02;
};

struct DiffusionParams {
  double alpha = 0.9;
  int knn_k = 10;
  double gamma = 3.0;
  int max_iterations = 1000;
  double tolerance = 1e-8;
};

struct PipelineConfig {
  double lambda = 0.9;
  RetrievalBackend retrieval_backend = RetrievalBackend::diffusion;
  Matcher matcher = Matcher::hungarian;
  double gate_score = -0.45;
  PeakParams peaks;
  int patch_size = 20;
  DiffusionParams diffusion;
  std::uint64_t seed = 0;

  // Throws ConfigError on the first violated invariant.
  void validate() const;
};

// Resolved configuration as key=value lines, one field per line.
std::string describe(const PipelineConfig& cfg);

}  // namespace denseassoc
