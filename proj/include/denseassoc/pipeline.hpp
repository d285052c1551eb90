#pragma once

// Track-then-evaluate runs and ablation sweeps over configuration arms.

#include <string>
#include <vector>

#include "denseassoc/metrics.hpp"
#include "denseassoc/types.hpp"

namespace denseassoc {

struct Arm {
  std::string label;
  PipelineConfig config;
};

struct ArmResult {
  Arm arm;
  std::vector<Trajectory> tracks;
  MetricReport report;
};

enum class SweepKind { lambda, backend, mode };

/// Accepts "lambda", "backend" and "mode"; throws ConfigError otherwise.
SweepKind parse_sweep(const std::string& s);

/// lambda: 0.0, 0.1, ..., 1.0. backend: cosine, euclidean, diffusion.
/// mode: motion-only (lambda 1), appearance-only (lambda 0), fused-greedy
/// and fused-hungarian (both at the base lambda).
std::vector<Arm> sweep_arms(SweepKind kind, const PipelineConfig& base);

ArmResult run_arm(const SceneBundle& bundle, const std::vector<Trajectory>& truth, const Arm& arm);

/// Runs arms on up to `jobs` threads. Results come back in arm order and do
/// not depend on `jobs`.
std::vector<ArmResult> run_sweep(const SceneBundle& bundle, const std::vector<Trajectory>& truth,
                                 const std::vector<Arm>& arms, unsigned jobs);

/// max - min of T-mAP across results (0 when empty).
double t_map_spread(const std::vector<ArmResult>& results);

/// One row per arm: setting, lambda, retrieval_backend, matcher, the metric
/// columns, then sweep_spread.
std::string ablation_csv(const std::vector<ArmResult>& results);

}  // namespace denseassoc
