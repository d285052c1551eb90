#include "denseassoc/types.hpp"

#include <cmath>
#include <sstream>

namespace denseassoc {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw std::invalid_argument("matrix data size does not match shape");
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

std::string to_string(RetrievalBackend b) {
  switch (b) {
    case RetrievalBackend::diffusion: return "diffusion";
    case RetrievalBackend::cosine: return "cosine";
    case RetrievalBackend::euclidean: return "euclidean";
  }
  return "?";
}

std::string to_string(Matcher m) { return m == Matcher::hungarian ? "hungarian" : "greedy"; }

RetrievalBackend parse_backend(const std::string& s) {
  if (s == "diffusion") return RetrievalBackend::diffusion;
  if (s == "cosine") return RetrievalBackend::cosine;
  if (s == "euclidean") return RetrievalBackend::euclidean;
  throw ConfigError("unknown retrieval backend '" + s + "' (expected cosine, euclidean or diffusion)");
}

Matcher parse_matcher(const std::string& s) {
  if (s == "hungarian") return Matcher::hungarian;
  if (s == "greedy") return Matcher::greedy;
  throw ConfigError("unknown matcher '" + s + "' (expected hungarian or greedy)");
}

void PipelineConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0,1], got " + std::to_string(lambda));
  if (peaks.window < 3 || peaks.window % 2 == 0)
    throw ConfigError("peak_window must be odd and >= 3, got " + std::to_string(peaks.window));
  if (!(peaks.rel_threshold >= 0.0 && peaks.rel_threshold <= 1.0))
    throw ConfigError("peak_rel_threshold must lie in [0,1]");
  if (!(peaks.abs_threshold >= 0.0)) throw ConfigError("peak_abs_threshold must be >= 0");
  if (patch_size < 1) throw ConfigError("patch_size must be >= 1");
  if (!(diffusion.alpha > 0.0 && diffusion.alpha < 1.0)) throw ConfigError("diffusion_alpha must lie in (0,1)");
  if (diffusion.knn_k < 1) throw ConfigError("diffusion_knn must be >= 1");
  if (!(diffusion.gamma > 0.0)) throw ConfigError("diffusion_gamma must be > 0");
  if (diffusion.max_iterations < 1) throw ConfigError("diffusion_max_iterations must be >= 1");
  if (!(diffusion.tolerance > 0.0)) throw ConfigError("diffusion_tolerance must be > 0");
  if (std::isnan(gate_score)) throw ConfigError("gate_score must not be NaN");
}

std::string describe(const PipelineConfig& cfg) {
  std::ostringstream os;
  os << "lambda=" << cfg.lambda << '\n'
     << "retrieval_backend=" << to_string(cfg.retrieval_backend) << '\n'
     << "matcher=" << to_string(cfg.matcher) << '\n'
     << "gate_score=" << cfg.gate_score << '\n'
     << "peak_window=" << cfg.peaks.window << '\n'
     << "peak_rel_threshold=" << cfg.peaks.rel_threshold << '\n'
     << "peak_abs_threshold=" << cfg.peaks.abs_threshold << '\n'
     << "patch_size=" << cfg.patch_size << '\n'
     << "diffusion_alpha=" << cfg.diffusion.alpha << '\n'
     << "diffusion_knn=" << cfg.diffusion.knn_k << '\n'
     << "diffusion_gamma=" << cfg.diffusion.gamma << '\n'
     << "diffusion_max_iterations=" << cfg.diffusion.max_iterations << '\n'
     << "diffusion_tolerance=" << cfg.diffusion.tolerance << '\n'
     << "seed=" << cfg.seed << '\n';
  return os.str();
}

}  // namespace denseassoc
