#include <doctest.h>

#include <random>

#include "denseassoc/localize.hpp"
#include "denseassoc/synth.hpp"
#include "oracles.hpp"

using namespace denseassoc;

namespace {

DensityMap random_map(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  DensityMap m(h, w);
  for (float& v : m.values()) v = u(rng);
  return m;
}

}  // namespace

TEST_CASE("single blob gives its exhaustive argmax") {
  const DensityMap m = oracle::gaussian_blobs({{40.0, 25.0}}, 3.0, 128, 128);
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m.values()[i] > m.values()[best]) best = i;
  const FramePoints peaks = extract_peaks(m, {});
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].x == double(best % 128));
  CHECK(peaks[0].y == double(best / 128));
  CHECK(peaks[0].x == 40.0);
  CHECK(peaks[0].y == 25.0);
  CHECK(peaks[0].score == doctest::Approx(1.0));
}

TEST_CASE("two equal blobs give both centers") {
  const DensityMap m = oracle::gaussian_blobs({{20.0, 20.0}, {40.0, 40.0}}, 3.0, 64, 64);
  const FramePoints peaks = extract_peaks(m, {});
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0] == Point{20, 20, peaks[0].score});
  CHECK(peaks[1] == Point{40, 40, peaks[1].score});
}

TEST_CASE("all-zero map has no peaks") {
  const DensityMap m(64, 64);
  CHECK(extract_peaks(m, {}).empty());
  CHECK(count_peaks(m, {}) == 0);
}

TEST_CASE("one blob counts as one") {
  CHECK(count_peaks(oracle::gaussian_blobs({{10.3, 7.8}}, 3.0, 32, 32), {}) == 1);
}

TEST_CASE("separated synthetic blobs are counted exactly") {
  ScenarioConfig c;
  c.n_agents = 12;
  c.n_frames = 5;
  c.width = 160;
  c.height = 120;
  c.min_spacing = 18;  // 6 sigma
  c.seed = 3;
  const Scenario s = generate_scenario(c);
  for (const auto& d : s.bundle.density) CHECK(count_peaks(d, {}) == 12);
}

TEST_CASE("agrees with the naive scan on tie-free maps") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t h = 5 + rng() % 30, w = 5 + rng() % 30;
    const DensityMap m = random_map(rng, h, w);
    PeakParams p;
    p.window = (trial % 3 == 0) ? 5 : 3;
    p.rel_threshold = 0.2 * (trial % 4);
    CAPTURE(trial);
    CHECK(extract_peaks(m, p) == oracle::naive_peaks(m, p));
  }
}

TEST_CASE("parallel and serial results are identical") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMap m = random_map(rng, 64, 80);
    CHECK(extract_peaks(m, {}, Exec::serial) == extract_peaks(m, {}, Exec::parallel));
  }
}

TEST_CASE("raising the relative threshold never adds peaks") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMap m = random_map(rng, 40, 40);
    std::size_t last = SIZE_MAX;
    for (double rel = 0.0; rel <= 1.0; rel += 0.05) {
      PeakParams p;
      p.rel_threshold = rel;
      const std::size_t n = count_peaks(m, p);
      CHECK(n <= last);
      last = n;
    }
  }
}

TEST_CASE("integer shifts move interior peaks by the same amount") {
  std::mt19937_64 rng(33);
  const std::size_t h = 40, w = 50, dx = 3, dy = 2;
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMap m = random_map(rng, h, w);
    DensityMap shifted(h, w);
    for (std::size_t r = 0; r + dy < h; ++r)
      for (std::size_t c = 0; c + dx < w; ++c) shifted.at(r + dy, c + dx) = m.at(r, c);
    PeakParams p;
    p.rel_threshold = 0.0;
    p.abs_threshold = 0.0;
    const FramePoints a = extract_peaks(m, p), b = extract_peaks(shifted, p);
    auto interior = [&](const Point& q, std::size_t lo_x, std::size_t lo_y, std::size_t hi_x, std::size_t hi_y) {
      return q.x >= lo_x && q.y >= lo_y && q.x <= hi_x && q.y <= hi_y;
    };
    // Peaks whose windows are unaffected by the shift or the zero fill.
    for (const Point& q : a) {
      if (!interior(q, 1, 1, w - dx - 2, h - dy - 2)) continue;
      const Point moved{q.x + dx, q.y + dy, q.score};
      CHECK(std::find(b.begin(), b.end(), moved) != b.end());
    }
    for (const Point& q : b) {
      if (!interior(q, dx + 1, dy + 1, w - 2, h - 2)) continue;
      const Point back{q.x - dx, q.y - dy, q.score};
      CHECK(std::find(a.begin(), a.end(), back) != a.end());
    }
  }
}

TEST_CASE("plateaus yield one peak at their smallest (y, x) member") {
  DensityMap m(6, 6);
  m.at(2, 3) = m.at(2, 4) = m.at(3, 3) = 0.8f;
  const FramePoints p = extract_peaks(m, {});
  REQUIRE(p.size() == 1);
  CHECK(p[0].x == 3.0);
  CHECK(p[0].y == 2.0);
}

TEST_CASE("a plateau touching a higher pixel yields nothing") {
  DensityMap m(6, 6);
  m.at(2, 2) = m.at(2, 3) = 0.5f;
  m.at(3, 4) = 0.7f;  // adjacent to (2,3)
  m.at(2, 5) = 0.9f;
  const FramePoints p = extract_peaks(m, {});
  REQUIRE(p.size() == 1);
  CHECK(p[0] == Point{5, 2, 0.9f});
}

TEST_CASE("scores are clamped to one and thresholds apply") {
  DensityMap m(5, 5);
  m.at(2, 2) = 3.0f;
  m.at(0, 0) = 0.5f;  // below 0.3 * 3
  const FramePoints p = extract_peaks(m, {});
  REQUIRE(p.size() == 1);
  CHECK(p[0].score == 1.0);

  PeakParams strict;
  strict.abs_threshold = 5.0;
  CHECK(extract_peaks(m, strict).empty());
}

TEST_CASE("border pixels use clipped windows") {
  DensityMap m(4, 4);
  m.at(0, 0) = 1.0f;
  m.at(3, 3) = 0.9f;
  CHECK(count_peaks(m, {}) == 2);
}

TEST_CASE("bad windows are configuration errors") {
  const DensityMap m(4, 4);
  PeakParams p;
  p.window = 4;
  CHECK_THROWS_AS(extract_peaks(m, p), ConfigError);
  p.window = 1;
  CHECK_THROWS_AS(extract_peaks(m, p), ConfigError);
  p = {};
  p.rel_threshold = -0.1;
  CHECK_THROWS_AS(extract_peaks(m, p), ConfigError);
}
