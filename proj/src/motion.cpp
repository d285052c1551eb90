#include "denseassoc/motion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace denseassoc {

namespace {

struct Encoded {
  double cx, cy;      // next-frame position (Gaussian center)
  double ux, uy, uz;  // unit direction of (dx, dy, 1)
};

void encode_row(std::size_t r, const std::vector<std::size_t>& members, const std::vector<Encoded>& items,
                const MpmParams& params, std::vector<double>& best, MotionField& field) {
  const std::size_t w = field.width();
  const double two_sigma_sq = 2.0 * params.sigma * params.sigma;
  const double radius_sq = params.radius * params.radius;
  std::fill(best.begin(), best.end(), 0.0);
  const double y = static_cast<double>(r);
  for (std::size_t idx : members) {
    const Encoded& e = items[idx];
    const double dy = y - e.cy;
    const double c0 = std::max(0.0, std::ceil(e.cx - params.radius));
    const double c1 = std::min(static_cast<double>(w) - 1.0, std::floor(e.cx + params.radius));
    for (double cx = c0; cx <= c1; cx += 1.0) {
      const double dx = cx - e.cx;
      const double d2 = dx * dx + dy * dy;
      if (d2 > radius_sq) continue;
      const double like = std::exp(-d2 / two_sigma_sq);
      const auto c = static_cast<std::size_t>(cx);
      if (like > best[c]) {
        best[c] = like;
        field.vx.at(r, c) = static_cast<float>(like * e.ux);
        field.vy.at(r, c) = static_cast<float>(like * e.uy);
        field.vz.at(r, c) = static_cast<float>(like * e.uz);
      }
    }
  }
}

}  // namespace

MotionField encode_mpm(const FramePoints& prev_points, const FramePoints& next_points,
                       const std::vector<std::optional<std::size_t>>& correspondence, const MpmParams& params,
                       std::size_t height, std::size_t width, Exec exec) {
  if (!(params.sigma > 0.0)) throw std::invalid_argument("encode_mpm: sigma must be > 0");
  if (!(params.radius >= 0.0)) throw std::invalid_argument("encode_mpm: radius must be >= 0");
  if (correspondence.size() != next_points.size())
    throw std::invalid_argument("encode_mpm: correspondence size differs from next-frame point count");

  std::vector<Encoded> items;
  for (std::size_t j = 0; j < next_points.size(); ++j) {
    if (!correspondence[j]) continue;
    const std::size_t k = *correspondence[j];
    if (k >= prev_points.size()) {
      throw std::out_of_range("encode_mpm: correspondence " + std::to_string(j) + " -> " + std::to_string(k) +
                              " exceeds " + std::to_string(prev_points.size()) + " previous points");
    }
    const double dx = prev_points[k].x - next_points[j].x;
    const double dy = prev_points[k].y - next_points[j].y;
    const double norm = std::sqrt(dx * dx + dy * dy + 1.0);
    items.push_back({next_points[j].x, next_points[j].y, dx / norm, dy / norm, 1.0 / norm});
  }

  MotionField field(height, width);
  if (height == 0 || width == 0) return field;

  std::vector<std::vector<std::size_t>> rows(height);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double lo = std::max(0.0, std::ceil(items[i].cy - params.radius));
    const double hi = std::min(static_cast<double>(height) - 1.0, std::floor(items[i].cy + params.radius));
    for (double r = lo; r <= hi; r += 1.0) rows[static_cast<std::size_t>(r)].push_back(i);
  }

  const auto n_rows = static_cast<std::ptrdiff_t>(height);
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<double> best(width);
#pragma omp for schedule(dynamic, 8)
      for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
        if (!rows[r].empty()) encode_row(static_cast<std::size_t>(r), rows[r], items, params, best, field);
      }
    }
  } else {
    std::vector<double> best(width);
    for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
      if (!rows[r].empty()) encode_row(static_cast<std::size_t>(r), rows[r], items, params, best, field);
    }
  }
  return field;
}

Offset decode_offset(const MotionField& field, const Point& point) {
  const double w = static_cast<double>(field.width()), h = static_cast<double>(field.height());
  if (!(point.x >= 0.0 && point.x < w && point.y >= 0.0 && point.y < h)) {
    throw std::out_of_range("decode_offset: point (" + std::to_string(point.x) + ", " + std::to_string(point.y) +
                            ") outside motion field");
  }
  const auto c = std::min(static_cast<std::size_t>(std::lround(point.x)), field.width() - 1);
  const auto r = std::min(static_cast<std::size_t>(std::lround(point.y)), field.height() - 1);
  const double vz = field.vz.at(r, c);
  if (vz <= kMotionEpsZ) return {};
  return {field.vx.at(r, c) / vz, field.vy.at(r, c) / vz};
}

FramePoints predict_prev_positions(const FramePoints& next_points, const MotionField& field) {
  FramePoints out;
  out.reserve(next_points.size());
  // Largest coordinates still inside [0,width) x [0,height).
  const double max_x = std::nextafter(static_cast<double>(field.width()), 0.0);
  const double max_y = std::nextafter(static_cast<double>(field.height()), 0.0);
  for (const Point& p : next_points) {
    const Offset o = decode_offset(field, p);
    out.push_back({std::clamp(p.x + o.dx, 0.0, max_x), std::clamp(p.y + o.dy, 0.0, max_y), p.score});
  }
  return out;
}

Matrix distance_matrix(const FramePoints& prev_points, const FramePoints& predicted, Exec exec) {
  Matrix m(prev_points.size(), predicted.size());
  const auto rows = static_cast<std::ptrdiff_t>(prev_points.size());
  auto fill_row = [&](std::ptrdiff_t k) {
    for (std::size_t j = 0; j < predicted.size(); ++j) {
      m(k, j) = std::hypot(prev_points[k].x - predicted[j].x, prev_points[k].y - predicted[j].y);
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < rows; ++k) fill_row(k);
  } else {
    for (std::ptrdiff_t k = 0; k < rows; ++k) fill_row(k);
  }
  return m;
}

Matrix rescale01(const Matrix& m, double degenerate_value) {
  Matrix out(m.rows(), m.cols());
  if (m.values().empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(m.values().begin(), m.values().end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    std::fill(out.values().begin(), out.values().end(), degenerate_value);
    return out;
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < m.values().size(); ++i) out.values()[i] = (m.values()[i] - lo) / span;
  return out;
}

}  // namespace denseassoc
