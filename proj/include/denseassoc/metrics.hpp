#pragma once

// Counting, localization and tracking metrics.
//
// AP is the area under the step precision-recall curve: every true positive
// contributes (1 / #gt) * precision at its rank, with predictions ranked by
// descending confidence.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "denseassoc/types.hpp"

namespace denseassoc {

inline constexpr double kTrackPixelThreshold = 25.0;
inline const std::vector<double> kTrackRatioThresholds = {0.10, 0.15, 0.20};
inline const std::vector<double> kReportedLocThresholds = {10.0, 15.0, 20.0};

struct CountingErrors {
  double mae = 0.0;
  double rmse = 0.0;
};

/// Throws std::invalid_argument on empty or unequal-length input.
CountingErrors counting_errors(const std::vector<long>& predicted, const std::vector<long>& truth);

/// hits[i] says whether the i-th ranked prediction is a true positive.
double average_precision(const std::vector<bool>& hits, std::size_t gt_total);

/// Predictions pooled across frames; each, in descending score order, takes
/// the nearest unmatched same-frame ground-truth point within `threshold`
/// pixels. With no ground truth, AP is 1 when there are no predictions and 0
/// otherwise.
double localization_ap(const std::vector<FramePoints>& pred, const std::vector<FramePoints>& gt, double threshold);

/// Mean of localization_ap over 1..25 px.
double l_map(const std::vector<FramePoints>& pred, const std::vector<FramePoints>& gt);

/// Fraction of the frames covered by either trajectory in which both exist
/// and lie within px_threshold of each other.
double match_ratio(const Trajectory& pred, const Trajectory& gt, double px_threshold = kTrackPixelThreshold);

/// Predictions ranked by mean observation score; each takes the unmatched
/// ground-truth track with the highest match ratio and is a true positive iff
/// that ratio reaches ratio_threshold (only true positives consume a ground
/// truth track).
double tracking_ap(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt, double ratio_threshold,
                   double px_threshold = kTrackPixelThreshold);

/// Mean of tracking_ap over ratio thresholds 0.10, 0.15, 0.20.
double t_map(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt);

struct MetricReport {
  double mae = 0.0;
  double rmse = 0.0;
  std::map<double, double> l_ap;  // pixel threshold -> AP (10, 15, 20)
  double l_map = 0.0;
  std::map<double, double> t_ap;  // ratio threshold -> AP (0.10, 0.15, 0.20)
  double t_map = 0.0;
};

/// Per-frame point lists from trajectories, ordered by track id.
std::vector<FramePoints> points_by_frame(const std::vector<Trajectory>& tracks, std::size_t frame_count);

MetricReport evaluate(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt,
                      std::size_t frame_count);

std::string to_key_value(const MetricReport& r);
std::string csv_header();
std::string to_csv_row(const MetricReport& r);

}  // namespace denseassoc
