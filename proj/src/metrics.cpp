#include "denseassoc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "denseassoc/io.hpp"

namespace denseassoc {

CountingErrors counting_errors(const std::vector<long>& predicted, const std::vector<long>& truth) {
  if (predicted.empty() || predicted.size() != truth.size())
    throw std::invalid_argument("counting_errors: need equal-length, non-empty count sequences");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = static_cast<double>(predicted[i] - truth[i]);
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const double n = static_cast<double>(predicted.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

double average_precision(const std::vector<bool>& hits, std::size_t gt_total) {
  if (gt_total == 0) return hits.empty() ? 1.0 : 0.0;
  double ap = 0.0;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < hits.size(); ++rank) {
    if (!hits[rank]) continue;
    ++tp;
    ap += static_cast<double>(tp) / static_cast<double>(rank + 1);
  }
  return ap / static_cast<double>(gt_total);
}

double localization_ap(const std::vector<FramePoints>& pred, const std::vector<FramePoints>& gt, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("localization_ap: threshold must be > 0");
  if (pred.size() != gt.size()) throw std::invalid_argument("localization_ap: frame count mismatch");

  struct Ranked {
    std::size_t frame, index;
    double score;
  };
  std::vector<Ranked> ranked;
  std::size_t gt_total = 0;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    gt_total += gt[f].size();
    for (std::size_t j = 0; j < pred[f].size(); ++j) ranked.push_back({f, j, pred[f][j].score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  std::vector<std::vector<char>> taken(gt.size());
  for (std::size_t f = 0; f < gt.size(); ++f) taken[f].assign(gt[f].size(), 0);

  std::vector<bool> hits;
  hits.reserve(ranked.size());
  for (const Ranked& r : ranked) {
    const Point& p = pred[r.frame][r.index];
    std::size_t best = gt[r.frame].size();
    double best_d = threshold;
    for (std::size_t g = 0; g < gt[r.frame].size(); ++g) {
      if (taken[r.frame][g]) continue;
      const double d = std::hypot(p.x - gt[r.frame][g].x, p.y - gt[r.frame][g].y);
      if (d < best_d || (d == best_d && best == gt[r.frame].size())) {
        best = g;
        best_d = d;
      }
    }
    const bool hit = best < gt[r.frame].size();
    if (hit) taken[r.frame][best] = 1;
    hits.push_back(hit);
  }
  return average_precision(hits, gt_total);
}

double l_map(const std::vector<FramePoints>& pred, const std::vector<FramePoints>& gt) {
  double sum = 0.0;
  for (int t = 1; t <= 25; ++t) sum += localization_ap(pred, gt, t);
  return sum / 25.0;
}

double match_ratio(const Trajectory& pred, const Trajectory& gt, double px_threshold) {
  std::size_t a = 0, b = 0, either = 0, close = 0;
  const auto& po = pred.observations;
  const auto& go = gt.observations;
  while (a < po.size() || b < go.size()) {
    ++either;
    if (b == go.size() || (a < po.size() && po[a].frame < go[b].frame)) {
      ++a;
    } else if (a == po.size() || go[b].frame < po[a].frame) {
      ++b;
    } else {
      if (std::hypot(po[a].point.x - go[b].point.x, po[a].point.y - go[b].point.y) <= px_threshold) ++close;
      ++a;
      ++b;
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(close) / static_cast<double>(either);
}

namespace {

struct RatioTable {
  std::vector<std::size_t> order;  // prediction indices by descending confidence
  Matrix ratio;                    // pred x gt
};

RatioTable ratio_table(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt, double px_threshold) {
  RatioTable t;
  t.ratio = Matrix(pred.size(), gt.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t g = 0; g < gt.size(); ++g) t.ratio(i, g) = match_ratio(pred[i], gt[g], px_threshold);

  std::vector<double> conf(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto& obs = pred[i].observations;
    if (obs.empty()) continue;
    double s = 0.0;
    for (const auto& o : obs) s += o.point.score;
    conf[i] = s / static_cast<double>(obs.size());
  }
  t.order.resize(pred.size());
  std::iota(t.order.begin(), t.order.end(), 0);
  std::stable_sort(t.order.begin(), t.order.end(), [&](std::size_t a, std::size_t b) {
    if (conf[a] != conf[b]) return conf[a] > conf[b];
    return pred[a].id < pred[b].id;
  });
  return t;
}

double tracking_ap_from(const RatioTable& t, std::size_t gt_count, double ratio_threshold) {
  std::vector<char> taken(gt_count, 0);
  std::vector<bool> hits;
  hits.reserve(t.order.size());
  for (std::size_t i : t.order) {
    std::size_t best = gt_count;
    for (std::size_t g = 0; g < gt_count; ++g) {
      if (taken[g]) continue;
      if (best == gt_count || t.ratio(i, g) > t.ratio(i, best)) best = g;
    }
    const bool hit = best < gt_count && t.ratio(i, best) >= ratio_threshold;
    if (hit) taken[best] = 1;
    hits.push_back(hit);
  }
  return average_precision(hits, gt_count);
}

}  // namespace

double tracking_ap(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt, double ratio_threshold,
                   double px_threshold) {
  if (!(ratio_threshold > 0.0 && ratio_threshold <= 1.0))
    throw std::invalid_argument("tracking_ap: ratio threshold must lie in (0,1]");
  return tracking_ap_from(ratio_table(pred, gt, px_threshold), gt.size(), ratio_threshold);
}

double t_map(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt) {
  const RatioTable t = ratio_table(pred, gt, kTrackPixelThreshold);
  double sum = 0.0;
  for (double thr : kTrackRatioThresholds) sum += tracking_ap_from(t, gt.size(), thr);
  return sum / static_cast<double>(kTrackRatioThresholds.size());
}

std::vector<FramePoints> points_by_frame(const std::vector<Trajectory>& tracks, std::size_t frame_count) {
  std::vector<const Trajectory*> order;
  for (const auto& t : tracks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Trajectory* a, const Trajectory* b) { return a->id < b->id; });
  std::vector<FramePoints> frames(frame_count);
  for (const Trajectory* t : order) {
    for (const Observation& o : t->observations) {
      if (o.frame < 0 || static_cast<std::size_t>(o.frame) >= frame_count) {
        throw ValidationError("track " + std::to_string(t->id) + " has an observation at frame " +
                              std::to_string(o.frame) + " outside 0.." + std::to_string(frame_count));
      }
      frames[o.frame].push_back(o.point);
    }
  }
  return frames;
}

MetricReport evaluate(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt,
                      std::size_t frame_count) {
  for (const auto& t : gt)
    if (t.observations.empty()) throw ValidationError("ground-truth track " + std::to_string(t.id) + " is empty");

  MetricReport r;
  const auto pred_frames = points_by_frame(pred, frame_count);
  const auto gt_frames = points_by_frame(gt, frame_count);
  if (frame_count > 0) {
    std::vector<long> pc, gc;
    for (std::size_t f = 0; f < frame_count; ++f) {
      pc.push_back(static_cast<long>(pred_frames[f].size()));
      gc.push_back(static_cast<long>(gt_frames[f].size()));
    }
    const CountingErrors ce = counting_errors(pc, gc);
    r.mae = ce.mae;
    r.rmse = ce.rmse;
  }

  double l_sum = 0.0;
  for (int t = 1; t <= 25; ++t) {
    const double ap = localization_ap(pred_frames, gt_frames, t);
    l_sum += ap;
    if (std::find(kReportedLocThresholds.begin(), kReportedLocThresholds.end(), double(t)) !=
        kReportedLocThresholds.end())
      r.l_ap[t] = ap;
  }
  r.l_map = l_sum / 25.0;

  const RatioTable table = ratio_table(pred, gt, kTrackPixelThreshold);
  double t_sum = 0.0;
  for (double thr : kTrackRatioThresholds) {
    r.t_ap[thr] = tracking_ap_from(table, gt.size(), thr);
    t_sum += r.t_ap[thr];
  }
  r.t_map = t_sum / static_cast<double>(kTrackRatioThresholds.size());
  return r;
}

namespace {

std::string ratio_label(double thr) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", thr);
  return buf;
}

}  // namespace

std::string to_key_value(const MetricReport& r) {
  std::ostringstream os;
  os << "mae=" << format_number(r.mae) << '\n' << "rmse=" << format_number(r.rmse) << '\n';
  for (const auto& [thr, ap] : r.l_ap) os << "l_ap@" << static_cast<int>(thr) << '=' << format_number(ap) << '\n';
  os << "l_map=" << format_number(r.l_map) << '\n';
  for (const auto& [thr, ap] : r.t_ap) os << "t_ap@" << ratio_label(thr) << '=' << format_number(ap) << '\n';
  os << "t_map=" << format_number(r.t_map) << '\n';
  return os.str();
}

std::string csv_header() { return "mae,rmse,l_ap@10,l_ap@15,l_ap@20,l_map,t_ap@0.10,t_ap@0.15,t_ap@0.20,t_map"; }

std::string to_csv_row(const MetricReport& r) {
  std::ostringstream os;
  os << format_number(r.mae) << ',' << format_number(r.rmse);
  for (double t : kReportedLocThresholds) {
    const auto it = r.l_ap.find(t);
    os << ',' << format_number(it == r.l_ap.end() ? 0.0 : it->second);
  }
  os << ',' << format_number(r.l_map);
  for (double t : kTrackRatioThresholds) {
    const auto it = r.t_ap.find(t);
    os << ',' << format_number(it == r.t_ap.end() ? 0.0 : it->second);
  }
  os << ',' << format_number(r.t_map);
  return os.str();
}

}  // namespace denseassoc
