#include <doctest.h>

#include <cmath>

#include "denseassoc/types.hpp"

using namespace denseassoc;

TEST_CASE("grid is row-major with x as column") {
  Grid<int> g(2, 3);
  g.at(1, 2) = 7;
  CHECK(g.values()[1 * 3 + 2] == 7);
  CHECK(g.row(1)[2] == 7);
  CHECK(g.height() == 2);
  CHECK(g.width() == 3);
  CHECK_FALSE(g.empty());
  CHECK(Grid<int>{}.empty());
}

TEST_CASE("matrix construction and transpose") {
  Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m(1, 0) == 4);
  const Matrix t = m.transposed();
  CHECK(t.rows() == 3);
  CHECK(t(0, 1) == 4);
  CHECK(t.transposed() == m);
  CHECK_THROWS_AS(Matrix(2, 2, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("backend and matcher names round trip") {
  for (auto b : {RetrievalBackend::diffusion, RetrievalBackend::cosine, RetrievalBackend::euclidean})
    CHECK(parse_backend(to_string(b)) == b);
  for (auto m : {Matcher::hungarian, Matcher::greedy}) CHECK(parse_matcher(to_string(m)) == m);
  CHECK_THROWS_AS(parse_backend("manhattan"), ConfigError);
  CHECK_THROWS_AS(parse_matcher("auction"), ConfigError);
}

TEST_CASE("pipeline defaults") {
  const PipelineConfig c;
  CHECK(c.lambda == 0.9);
  CHECK(c.retrieval_backend == RetrievalBackend::diffusion);
  CHECK(c.peaks.window == 3);
  CHECK(c.patch_size == 20);
  CHECK_NOTHROW(c.validate());
  CHECK(describe(c).find("lambda=0.9\n") != std::string::npos);
}

TEST_CASE("pipeline validation rejects each broken invariant") {
  auto broken = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(broken([](auto& c) { c.lambda = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.lambda = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.lambda = std::nan(""); }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.peaks.window = 4; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.peaks.window = 1; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.peaks.rel_threshold = 1.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.peaks.abs_threshold = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.patch_size = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.diffusion.alpha = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.diffusion.knn_k = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.diffusion.gamma = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.diffusion.max_iterations = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.diffusion.tolerance = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.gate_score = std::nan(""); }).validate(), ConfigError);
  CHECK_NOTHROW(broken([](auto& c) { c.lambda = 0.0; }).validate());
  CHECK_NOTHROW(broken([](auto& c) { c.lambda = 1.0; }).validate());
}
