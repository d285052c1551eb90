#include "denseassoc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "denseassoc/localize.hpp"

namespace denseassoc {

void ScenarioConfig::validate() const {
  if (n_agents < 0) throw ConfigError("n_agents must be >= 0");
  if (n_frames < 0) throw ConfigError("n_frames must be >= 0");
  if (width < 1 || height < 1) throw ConfigError("width and height must be >= 1");
  if (!(speed_mean >= 0.0) || !(speed_jitter >= 0.0)) throw ConfigError("speed and jitter must be >= 0");
  if (!(blob_sigma > 0.0)) throw ConfigError("blob_sigma must be > 0");
  if (!(min_spacing >= 0.0)) throw ConfigError("min_spacing must be >= 0");
  if (feature_dim < 2) throw ConfigError("feature_dim must be >= 2");
  if (!(feature_noise >= 0.0)) throw ConfigError("feature_noise must be >= 0");
  if (!(distractor_correlation >= 0.0 && distractor_correlation < 1.0))
    throw ConfigError("distractor_correlation must lie in [0,1)");
  if (!(mpm.sigma > 0.0)) throw ConfigError("mpm sigma must be > 0");
}

ScenarioConfig standard_crowded_scenario() {
  ScenarioConfig c;
  c.seed = 42;
  c.n_agents = 50;
  c.n_frames = 100;
  c.width = 512;
  c.height = 512;
  c.speed_mean = 2.0;
  c.speed_jitter = 1.0;
  c.blob_sigma = 3.0;
  c.min_spacing = 12.0;
  c.feature_dim = 64;
  c.feature_noise = 0.15;
  c.distractor_correlation = 0.3;
  return c;
}

namespace {

constexpr int kPlacementTries = 10000;
constexpr int kStepTries = 8;
constexpr int kBaseTries = 1000;

using Rng = std::mt19937_64;

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::vector<double>> make_bases(const ScenarioConfig& cfg, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = static_cast<std::size_t>(cfg.feature_dim);
  std::vector<std::vector<double>> bases;
  for (int a = 0; a < cfg.n_agents; ++a) {
    std::vector<double> v(dim);
    bool ok = false;
    for (int t = 0; t < kBaseTries && !ok; ++t) {
      for (double& x : v) x = normal(rng);
      normalize(v);
      ok = std::all_of(bases.begin(), bases.end(),
                       [&](const auto& b) { return dot(v, b) <= cfg.distractor_correlation; });
    }
    if (!ok) {
      // Gram-Schmidt fallback: orthogonal to every accepted base.
      for (const auto& b : bases) {
        const double d = dot(v, b);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= d * b[i];
      }
      double n = std::sqrt(dot(v, v));
      if (n < 1e-6) {
        throw ConfigError("cannot draw " + std::to_string(cfg.n_agents) + " appearance vectors in dimension " +
                          std::to_string(dim) + " with correlation <= " +
                          std::to_string(cfg.distractor_correlation));
      }
      normalize(v);
    }
    bases.push_back(std::move(v));
  }
  return bases;
}

bool spaced(const std::vector<Point>& pos, std::size_t self, const Point& candidate, double spacing) {
  for (std::size_t k = 0; k < pos.size(); ++k)
    if (k != self && dist(pos[k], candidate) < spacing) return false;
  return true;
}

void reflect(double& x, double& vx, double hi) {
  if (x < 0.0) {
    x = -x;
    vx = -vx;
  }
  if (x > hi) {
    x = 2.0 * hi - x;
    vx = -vx;
  }
  x = std::clamp(x, 0.0, hi);
}

void render_row(std::size_t r, const std::vector<std::size_t>& members, const std::vector<Point>& centers,
                double sigma, double cutoff, DensityMap& map, std::vector<double>& acc) {
  const std::size_t w = map.width();
  std::fill(acc.begin(), acc.end(), 0.0);
  const double two_sigma_sq = 2.0 * sigma * sigma;
  const double y = static_cast<double>(r);
  for (std::size_t idx : members) {
    const Point& c = centers[idx];
    const double dy = y - c.y;
    const double c0 = std::max(0.0, std::ceil(c.x - cutoff));
    const double c1 = std::min(static_cast<double>(w) - 1.0, std::floor(c.x + cutoff));
    for (double x = c0; x <= c1; x += 1.0) {
      const double dx = x - c.x;
      acc[static_cast<std::size_t>(x)] += std::exp(-(dx * dx + dy * dy) / two_sigma_sq);
    }
  }
  for (std::size_t c = 0; c < w; ++c) map.at(r, c) = static_cast<float>(acc[c]);
}

}  // namespace

DensityMap render_density(const std::vector<Point>& centers, double sigma, std::size_t height, std::size_t width,
                          Exec exec) {
  DensityMap map(height, width);
  if (height == 0 || width == 0) return map;
  const double cutoff = 5.0 * sigma;
  std::vector<std::vector<std::size_t>> rows(height);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double lo = std::max(0.0, std::ceil(centers[i].y - cutoff));
    const double hi = std::min(static_cast<double>(height) - 1.0, std::floor(centers[i].y + cutoff));
    for (double r = lo; r <= hi; r += 1.0) rows[static_cast<std::size_t>(r)].push_back(i);
  }
  const auto n_rows = static_cast<std::ptrdiff_t>(height);
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<double> acc(width);
#pragma omp for schedule(dynamic, 8)
      for (std::ptrdiff_t r = 0; r < n_rows; ++r)
        if (!rows[r].empty()) render_row(static_cast<std::size_t>(r), rows[r], centers, sigma, cutoff, map, acc);
    }
  } else {
    std::vector<double> acc(width);
    for (std::ptrdiff_t r = 0; r < n_rows; ++r)
      if (!rows[r].empty()) render_row(static_cast<std::size_t>(r), rows[r], centers, sigma, cutoff, map, acc);
  }
  return map;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double max_x = static_cast<double>(cfg.width) - 1.0;
  const double max_y = static_cast<double>(cfg.height) - 1.0;
  const auto n_agents = static_cast<std::size_t>(cfg.n_agents);
  const auto n_frames = static_cast<std::size_t>(cfg.n_frames);

  std::vector<Point> pos;
  for (std::size_t a = 0; a < n_agents; ++a) {
    bool placed = false;
    for (int t = 0; t < kPlacementTries && !placed; ++t) {
      const Point c{unit(rng) * max_x, unit(rng) * max_y, 1.0};
      if (spaced(pos, pos.size(), c, cfg.min_spacing)) {
        pos.push_back(c);
        placed = true;
      }
    }
    if (!placed) {
      throw ConfigError("cannot place " + std::to_string(n_agents) + " agents " + std::to_string(cfg.min_spacing) +
                        " px apart in a " + std::to_string(cfg.width) + "x" + std::to_string(cfg.height) + " arena");
    }
  }
  std::vector<std::pair<double, double>> vel;
  for (std::size_t a = 0; a < n_agents; ++a) {
    const double heading = unit(rng) * 2.0 * std::numbers::pi;
    vel.emplace_back(cfg.speed_mean * std::cos(heading), cfg.speed_mean * std::sin(heading));
  }
  const auto bases = make_bases(cfg, rng);

  Scenario s;
  SceneBundle& b = s.bundle;
  b.width = cfg.width;
  b.height = cfg.height;
  if (n_frames > 0 && n_agents > 0) b.points.emplace();
  if (n_frames > 0 && n_agents > 0) b.features.emplace();
  if (n_frames > 0 && cfg.emit_images) b.images.emplace();
  for (std::size_t a = 0; a < n_agents; ++a) s.truth.push_back({static_cast<std::int64_t>(a), {}});

  std::uniform_real_distribution<double> jitter(-cfg.speed_jitter, cfg.speed_jitter);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_scale = cfg.feature_noise / std::sqrt(static_cast<double>(cfg.feature_dim));

  std::vector<Point> previous;
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (f > 0) {
      previous = pos;
      for (std::size_t a = 0; a < n_agents; ++a) {
        bool moved = false;
        for (int t = 0; t < kStepTries && !moved; ++t) {
          double vx = vel[a].first, vy = vel[a].second;
          Point c{pos[a].x + vx + jitter(rng), pos[a].y + vy + jitter(rng), 1.0};
          reflect(c.x, vx, max_x);
          reflect(c.y, vy, max_y);
          if (spaced(pos, a, c, cfg.min_spacing)) {
            pos[a] = c;
            vel[a] = {vx, vy};
            moved = true;
          } else {
            vel[a] = {-vel[a].first, -vel[a].second};
          }
        }
      }
      FramePoints prev_pts(previous.begin(), previous.end()), next_pts(pos.begin(), pos.end());
      std::vector<std::optional<std::size_t>> corr(n_agents);
      for (std::size_t a = 0; a < n_agents; ++a) corr[a] = a;
      b.motion.push_back(encode_mpm(prev_pts, next_pts, corr, cfg.mpm, cfg.height, cfg.width));
    }
    for (std::size_t a = 0; a < n_agents; ++a) s.truth[a].observations.push_back({static_cast<int>(f), pos[a]});

    b.density.push_back(render_density(pos, cfg.blob_sigma, cfg.height, cfg.width));
    if (b.images) {
      Image img(cfg.height, cfg.width);
      const auto& d = b.density.back().values();
      for (std::size_t i = 0; i < d.size(); ++i)
        img.values()[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(double(d[i]), 0.0, 1.0)));
      b.images->push_back(std::move(img));
    }

    if (b.points) {
      FramePoints detections = extract_peaks(b.density.back(), cfg.peaks);
      FeatureSet feats(detections.size(), static_cast<std::size_t>(cfg.feature_dim));
      std::vector<double> v(static_cast<std::size_t>(cfg.feature_dim));
      for (std::size_t j = 0; j < detections.size(); ++j) {
        std::size_t nearest = 0;
        for (std::size_t a = 1; a < n_agents; ++a)
          if (dist(pos[a], detections[j]) < dist(pos[nearest], detections[j])) nearest = a;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = bases[nearest][i] + noise_scale * normal(rng);
        normalize(v);
        auto row = feats.row(j);
        for (std::size_t i = 0; i < v.size(); ++i) row[i] = static_cast<float>(v[i]);
      }
      b.points->push_back(std::move(detections));
      b.features->push_back(std::move(feats));
    }
  }
  for (auto& t : s.truth)
    for (auto& o : t.observations) o.point.score = 1.0;
  if (n_agents == 0) s.truth.clear();
  return s;
}

Rgb track_color(std::int64_t id) {
  const double golden = 0.6180339887498949;
  double hue = std::fmod(static_cast<double>(id) * golden, 1.0);
  if (hue < 0.0) hue += 1.0;
  const double h6 = hue * 6.0;
  const int sector = static_cast<int>(h6) % 6;
  const double frac = h6 - std::floor(h6);
  const auto up = static_cast<std::uint8_t>(std::lround(255.0 * frac));
  const auto down = static_cast<std::uint8_t>(255 - up);
  switch (sector) {
    case 0: return {255, up, 0};
    case 1: return {down, 255, 0};
    case 2: return {0, 255, up};
    case 3: return {0, down, 255};
    case 4: return {up, 0, 255};
    default: return {255, 0, down};
  }
}

RgbImage render_overlay(const SceneBundle& bundle, const std::vector<Trajectory>& tracks, std::size_t frame) {
  if (frame >= bundle.frame_count()) {
    throw std::out_of_range("render_overlay: frame " + std::to_string(frame) + " outside 0.." +
                            std::to_string(bundle.frame_count()));
  }
  const DensityMap& d = bundle.density[frame];
  RgbImage img(d.height(), d.width());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto g = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(double(d.values()[i]), 0.0, 1.0)));
    img.values()[i] = {g, g, g};
  }
  const long h = static_cast<long>(d.height()), w = static_cast<long>(d.width());
  for (const Trajectory& t : tracks) {
    const Rgb color = track_color(t.id);
    for (const Observation& o : t.observations) {
      if (o.frame != static_cast<int>(frame)) continue;
      const long cx = std::lround(o.point.x), cy = std::lround(o.point.y);
      for (long y = std::max(0L, cy - 1); y <= std::min(h - 1, cy + 1); ++y)
        for (long x = std::max(0L, cx - 1); x <= std::min(w - 1, cx + 1); ++x) img.at(y, x) = color;
    }
  }
  return img;
}

}  // namespace denseassoc
