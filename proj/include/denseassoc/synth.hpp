#pragma once

// Synthetic crowd scenarios with known ground truth: agents moving with
// constant velocity plus jitter, density maps rendered as unit Gaussians,
// motion fields encoded from the true correspondences, and per-agent
// appearance vectors.

#include <cstdint>
#include <vector>

#include "denseassoc/motion.hpp"
#include "denseassoc/parallel.hpp"
#include "denseassoc/types.hpp"

namespace denseassoc {

struct ScenarioConfig {
  int n_agents = 10;
  int n_frames = 50;
  std::size_t width = 256;
  std::size_t height = 256;
  double speed_mean = 2.0;
  double speed_jitter = 1.0;
  double blob_sigma = 3.0;
  double min_spacing = 30.0;
  int feature_dim = 64;
  double feature_noise = 0.0;
  double distractor_correlation = 0.3;
  std::uint64_t seed = 42;
  MpmParams mpm;
  PeakParams peaks;     // detector used to emit per-frame points
  bool emit_images = false;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

/// seed=42, 50 agents, 100 frames, 512x512, speed 2 +/- 1, sigma 3,
/// min_spacing 12, dim 64, noise 0.15, correlation 0.3.
ScenarioConfig standard_crowded_scenario();

struct Scenario {
  SceneBundle bundle;
  std::vector<Trajectory> truth;  // id = agent index, every frame, score 1
};

/// Agents keep at least min_spacing from each other in every frame: a step
/// that would break spacing is retried with fresh jitter and reversed
/// velocity, and the agent stays put when no retry succeeds. Emitted points
/// are density peaks; each carries the appearance of its nearest agent.
/// Throws ConfigError when the agents cannot be placed.
Scenario generate_scenario(const ScenarioConfig& cfg);

/// Superposed unit-amplitude Gaussians, truncated at 5 sigma.
DensityMap render_density(const std::vector<Point>& centers, double sigma, std::size_t height, std::size_t width,
                          Exec exec = Exec::parallel);

/// Saturated color from a golden-ratio hue walk; never gray.
Rgb track_color(std::int64_t id);

/// Grayscale density background with a 3x3 marker per trajectory observed at
/// `frame`. Throws std::out_of_range for frames outside the bundle.
RgbImage render_overlay(const SceneBundle& bundle, const std::vector<Trajectory>& tracks, std::size_t frame);

}  // namespace denseassoc
