#include "denseassoc/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace denseassoc {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kVersion = 1;

class ByteWriter {
 public:
  void magic(const char* m) { buf_.insert(buf_.end(), m, m + 4); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void floats(const std::vector<float>& vs) {
    buf_.reserve(buf_.size() + vs.size() * 4);
    for (float v : vs) f32(v);
  }
  void save(const fs::path& file) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw IoError("write failed for " + file.string());
  }

 private:
  std::vector<char> buf_;
};

std::vector<char> slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class ByteReader {
 public:
  explicit ByteReader(const fs::path& file) : file_(file), buf_(slurp(file)) {}

  void expect_magic(const char* m) {
    need(4);
    if (std::memcmp(buf_.data(), m, 4) != 0)
      throw FormatError(file_.string() + ": bad magic, expected \"" + std::string(m, 4) + "\"");
    pos_ = 4;
    const std::uint32_t version = u32();
    if (version != kVersion)
      throw FormatError(file_.string() + ": unsupported version " + std::to_string(version));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  void floats(std::vector<float>& out) {
    need(out.size() * 4);
    for (float& v : out) v = std::bit_cast<float>(u32());
  }
  void finish() const {
    if (pos_ != buf_.size()) throw FormatError(file_.string() + ": trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw FormatError(file_.string() + ": truncated file");
  }

  fs::path file_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <class T>
T parse_field(const std::string& s, const fs::path& file, std::size_t line_no) {
  T v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw FormatError(file.string() + ":" + std::to_string(line_no) + ": cannot parse '" + s + "'");
  return v;
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + file.string());
}

template <class T>
void check_grid(const Grid<T>& g, std::size_t h, std::size_t w, std::optional<std::size_t> frame, const char* field,
                std::vector<Violation>& out) {
  if (g.height() != h || g.width() != w) {
    out.push_back({frame, field,
                   "dimensions " + std::to_string(g.height()) + "x" + std::to_string(g.width()) + " differ from bundle " +
                       std::to_string(h) + "x" + std::to_string(w)});
  }
}

std::string pixel(std::size_t r, std::size_t c) {
  return "pixel (x=" + std::to_string(c) + ", y=" + std::to_string(r) + ")";
}

}  // namespace

std::string to_string(const Violation& v) {
  std::string s = v.frame ? "frame " + std::to_string(*v.frame) + ": " : std::string{};
  return s + v.field + ": " + v.message;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string frame_file(std::size_t frame, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frame_%06zu.%s", frame, ext);
  return buf;
}

std::string pair_file(std::size_t later_frame) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "pair_%06zu.mpm", later_frame);
  return buf;
}

// -- validation -------------------------------------------------------------

std::vector<Violation> validate_bundle(const SceneBundle& b) {
  std::vector<Violation> out;
  const std::size_t n = b.frame_count();
  const std::size_t h = b.height, w = b.width;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = b.density[i];
    check_grid(d, h, w, i, "density", out);
    for (std::size_t r = 0; r < d.height(); ++r) {
      const auto row = d.row(r);
      const auto bad = std::find_if(row.begin(), row.end(), [](float v) { return !std::isfinite(v) || v < 0.0f; });
      if (bad != row.end()) {
        out.push_back({i, "density", "value " + format_number(*bad) + " at " + pixel(r, bad - row.begin()) +
                                         " is negative or non-finite"});
        break;
      }
    }
  }

  if (b.points) {
    if (b.points->size() != n) {
      out.push_back({std::nullopt, "points",
                     "expected " + std::to_string(n) + " point lists, found " + std::to_string(b.points->size())});
    }
    for (std::size_t i = 0; i < b.points->size(); ++i) {
      const auto& pts = (*b.points)[i];
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const Point& p = pts[j];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0 || p.x >= static_cast<double>(w) ||
            p.y >= static_cast<double>(h)) {
          out.push_back({i, "points", "point " + std::to_string(j) + " at (" + format_number(p.x) + ", " +
                                          format_number(p.y) + ") lies outside the frame"});
        }
        if (!(p.score >= 0.0 && p.score <= 1.0)) {
          out.push_back({i, "points", "point " + std::to_string(j) + " score " + format_number(p.score) +
                                          " outside [0,1]"});
        }
      }
    }
  }

  if (b.features) {
    if (b.features->size() != n) {
      out.push_back({std::nullopt, "features",
                     "expected " + std::to_string(n) + " feature sets, found " + std::to_string(b.features->size())});
    }
    if (!b.points) out.push_back({std::nullopt, "features", "feature sets present without point lists"});
    std::optional<std::size_t> dim;
    for (std::size_t i = 0; i < b.features->size(); ++i) {
      const FeatureSet& f = (*b.features)[i];
      if (f.dim() < 1) out.push_back({i, "features", "dimension must be >= 1"});
      if (dim && f.dim() != *dim) {
        out.push_back({i, "features", "dimension " + std::to_string(f.dim()) + " differs from " + std::to_string(*dim)});
      }
      if (!dim) dim = f.dim();
      if (b.points && i < b.points->size() && f.count() != (*b.points)[i].size()) {
        out.push_back({i, "features", "count " + std::to_string(f.count()) + " does not match " +
                                          std::to_string((*b.points)[i].size()) + " points"});
      }
      const auto& vals = f.values();
      const auto bad = std::find_if(vals.begin(), vals.end(), [](float v) { return !std::isfinite(v); });
      if (bad != vals.end()) {
        const auto idx = static_cast<std::size_t>(bad - vals.begin());
        out.push_back({i, "features", "non-finite value in vector " + std::to_string(idx / std::max<std::size_t>(f.dim(), 1))});
      }
    }
  }

  const std::size_t expected_fields = n >= 1 ? n - 1 : 0;
  if (b.motion.size() != expected_fields) {
    out.push_back({std::nullopt, "motion",
                   "expected " + std::to_string(expected_fields) + " motion fields, found " +
                       std::to_string(b.motion.size())});
  }
  for (std::size_t k = 0; k < b.motion.size(); ++k) {
    const MotionField& m = b.motion[k];
    const std::size_t frame = k + 1;
    check_grid(m.vx, h, w, frame, "motion", out);
    check_grid(m.vy, h, w, frame, "motion", out);
    check_grid(m.vz, h, w, frame, "motion", out);
    if (m.vx.size() != m.vz.size() || m.vy.size() != m.vz.size()) continue;
    for (std::size_t r = 0; r < m.height(); ++r) {
      bool reported = false;
      for (std::size_t c = 0; c < m.width(); ++c) {
        const double x = m.vx.at(r, c), y = m.vy.at(r, c), z = m.vz.at(r, c);
        const double norm = std::sqrt(x * x + y * y + z * z);
        if (!std::isfinite(norm) || norm > 1.0 + 1e-5 || z < 0.0) {
          out.push_back({frame, "motion", "vector at " + pixel(r, c) + " has norm " + format_number(norm) +
                                              " and z " + format_number(z) + " (need norm <= 1, z >= 0)"});
          reported = true;
          break;
        }
      }
      if (reported) break;
    }
  }

  if (b.images) {
    if (b.images->size() != n) {
      out.push_back({std::nullopt, "images",
                     "expected " + std::to_string(n) + " images, found " + std::to_string(b.images->size())});
    }
    for (std::size_t i = 0; i < b.images->size(); ++i) check_grid((*b.images)[i], h, w, i, "images", out);
  }
  return out;
}

// -- per-file formats --------------------------------------------------------

void write_density(const DensityMap& map, const fs::path& file) {
  ByteWriter w;
  w.magic("DMAP");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(map.height()));
  w.u32(static_cast<std::uint32_t>(map.width()));
  w.floats(map.values());
  w.save(file);
}

DensityMap read_density(const fs::path& file) {
  ByteReader r(file);
  r.expect_magic("DMAP");
  const std::uint32_t h = r.u32(), w = r.u32();
  DensityMap map(h, w);
  r.floats(map.values());
  r.finish();
  return map;
}

void write_motion(const MotionField& field, const fs::path& file) {
  ByteWriter w;
  w.magic("MPMF");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(field.height()));
  w.u32(static_cast<std::uint32_t>(field.width()));
  w.floats(field.vx.values());
  w.floats(field.vy.values());
  w.floats(field.vz.values());
  w.save(file);
}

MotionField read_motion(const fs::path& file) {
  ByteReader r(file);
  r.expect_magic("MPMF");
  const std::uint32_t h = r.u32(), w = r.u32();
  MotionField field(h, w);
  r.floats(field.vx.values());
  r.floats(field.vy.values());
  r.floats(field.vz.values());
  r.finish();
  return field;
}

void write_features(const FeatureSet& features, const fs::path& file) {
  ByteWriter w;
  w.magic("FEAT");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(features.count()));
  w.u32(static_cast<std::uint32_t>(features.dim()));
  w.floats(features.values());
  w.save(file);
}

FeatureSet read_features(const fs::path& file) {
  ByteReader r(file);
  r.expect_magic("FEAT");
  const std::uint32_t count = r.u32(), dim = r.u32();
  FeatureSet f(count, dim);
  r.floats(f.values());
  r.finish();
  return f;
}

void write_points(const FramePoints& points, const fs::path& file) {
  std::string text = "index,x,y,score\n";
  for (std::size_t j = 0; j < points.size(); ++j) {
    text += std::to_string(j) + ',' + format_number(points[j].x) + ',' + format_number(points[j].y) + ',' +
            format_number(points[j].score) + '\n';
  }
  write_text(file, text);
}

FramePoints read_points(const fs::path& file) {
  const auto lines = read_lines(file);
  if (lines.empty() || lines[0] != "index,x,y,score")
    throw FormatError(file.string() + ": expected header 'index,x,y,score'");
  FramePoints pts;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    if (f.size() != 4) throw FormatError(file.string() + ":" + std::to_string(i + 1) + ": expected 4 fields");
    const auto index = parse_field<std::size_t>(f[0], file, i + 1);
    if (index != pts.size())
      throw FormatError(file.string() + ":" + std::to_string(i + 1) + ": index must ascend from 0");
    pts.push_back({parse_field<double>(f[1], file, i + 1), parse_field<double>(f[2], file, i + 1),
                   parse_field<double>(f[3], file, i + 1)});
  }
  return pts;
}

void write_image(const Image& image, const fs::path& file) {
  std::string header = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << header;
  out.write(reinterpret_cast<const char*>(image.values().data()), static_cast<std::streamsize>(image.size()));
  if (!out) throw IoError("write failed for " + file.string());
}

Image read_image(const fs::path& file) {
  const auto buf = slurp(file);
  // Header: "P5" whitespace width whitespace height whitespace maxval single-whitespace data.
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    return std::string(buf.data() + start, pos - start);
  };
  if (token() != "P5") throw FormatError(file.string() + ": bad magic, expected \"P5\"");
  const auto w = parse_field<std::size_t>(token(), file, 1);
  const auto h = parse_field<std::size_t>(token(), file, 1);
  if (token() != "255") throw FormatError(file.string() + ": only maxval 255 is supported");
  ++pos;
  if (buf.size() < pos || buf.size() - pos != w * h) throw FormatError(file.string() + ": pixel payload size mismatch");
  Image img(h, w);
  std::memcpy(img.values().data(), buf.data() + pos, w * h);
  return img;
}

void write_ppm(const RgbImage& image, const fs::path& file) {
  std::string data = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  data.reserve(data.size() + image.size() * 3);
  for (const Rgb& px : image.values()) {
    data.push_back(static_cast<char>(px.r));
    data.push_back(static_cast<char>(px.g));
    data.push_back(static_cast<char>(px.b));
  }
  write_text(file, data);
}

void write_tracks(const std::vector<Trajectory>& tracks, const fs::path& file) {
  std::vector<const Trajectory*> order;
  for (const auto& t : tracks) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const Trajectory* a, const Trajectory* b) { return a->id < b->id; });
  std::string text = "track_id,frame,x,y,score\n";
  for (const Trajectory* t : order) {
    for (const Observation& o : t->observations) {
      text += std::to_string(t->id) + ',' + std::to_string(o.frame) + ',' + format_number(o.point.x) + ',' +
              format_number(o.point.y) + ',' + format_number(o.point.score) + '\n';
    }
  }
  write_text(file, text);
}

std::vector<Trajectory> read_tracks(const fs::path& file) {
  if (!fs::exists(file)) throw IoError("missing file " + file.string());
  const auto lines = read_lines(file);
  if (lines.empty() || lines[0] != "track_id,frame,x,y,score")
    throw FormatError(file.string() + ": expected header 'track_id,frame,x,y,score'");
  std::vector<Trajectory> tracks;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    const std::size_t ln = i + 1;
    if (f.size() != 5) throw FormatError(file.string() + ":" + std::to_string(ln) + ": expected 5 fields");
    const auto id = parse_field<std::int64_t>(f[0], file, ln);
    const auto frame = parse_field<int>(f[1], file, ln);
    const Point p{parse_field<double>(f[2], file, ln), parse_field<double>(f[3], file, ln),
                  parse_field<double>(f[4], file, ln)};
    if (id < 0 || frame < 0) throw FormatError(file.string() + ":" + std::to_string(ln) + ": negative id or frame");
    if (tracks.empty() || tracks.back().id != id) {
      if (!tracks.empty() && tracks.back().id > id)
        throw FormatError(file.string() + ":" + std::to_string(ln) + ": rows not sorted by track_id");
      tracks.push_back({id, {}});
    } else if (tracks.back().observations.back().frame >= frame) {
      throw FormatError(file.string() + ":" + std::to_string(ln) + ": frames must strictly increase within a track");
    }
    tracks.back().observations.push_back({frame, p});
  }
  return tracks;
}

// -- manifest and bundle -----------------------------------------------------

void write_manifest(const Manifest& m, const fs::path& dir) {
  std::ostringstream os;
  os << "frame_count=" << m.frame_count << '\n'
     << "width=" << m.width << '\n'
     << "height=" << m.height << '\n'
     << "has_features=" << (m.has_features ? 1 : 0) << '\n'
     << "has_images=" << (m.has_images ? 1 : 0) << '\n';
  write_text(dir / "bundle.txt", os.str());
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path file = dir / "bundle.txt";
  if (!fs::exists(file)) throw IoError("missing manifest " + file.string());
  std::map<std::string, std::string> kv;
  const auto lines = read_lines(file);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto eq = lines[i].find('=');
    if (eq == std::string::npos)
      throw FormatError(file.string() + ":" + std::to_string(i + 1) + ": expected key=value");
    kv[lines[i].substr(0, eq)] = lines[i].substr(eq + 1);
  }
  auto get = [&](const char* key, bool required) -> std::size_t {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw FormatError(file.string() + ": missing key '" + key + "'");
      return 0;
    }
    return parse_field<std::size_t>(it->second, file, 0);
  };
  Manifest m;
  m.frame_count = get("frame_count", true);
  m.width = get("width", true);
  m.height = get("height", true);
  m.has_features = get("has_features", false) != 0;
  m.has_images = get("has_images", false) != 0;
  return m;
}

void write_bundle(const SceneBundle& b, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  write_manifest({b.frame_count(), b.width, b.height, b.features.has_value(), b.images.has_value()}, dir);
  for (std::size_t i = 0; i < b.frame_count(); ++i) {
    write_density(b.density[i], dir / frame_file(i, "dmap"));
    if (b.points) write_points((*b.points)[i], dir / frame_file(i, "pts"));
    if (b.features) write_features((*b.features)[i], dir / frame_file(i, "feat"));
    if (b.images) write_image((*b.images)[i], dir / frame_file(i, "pgm"));
  }
  for (std::size_t k = 0; k < b.motion.size(); ++k) write_motion(b.motion[k], dir / pair_file(k + 1));
}

SceneBundle read_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("bundle directory " + dir.string() + " does not exist");
  const Manifest m = read_manifest(dir);
  SceneBundle b;
  b.width = m.width;
  b.height = m.height;
  const std::size_t n = m.frame_count;

  std::size_t points_found = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const fs::path dmap = dir / frame_file(i, "dmap");
    if (!fs::exists(dmap)) throw IoError("missing density map " + dmap.string());
    b.density.push_back(read_density(dmap));
    if (fs::exists(dir / frame_file(i, "pts"))) ++points_found;
  }
  if (points_found != 0 && points_found != n) {
    throw ValidationError("point lists present for " + std::to_string(points_found) + " of " + std::to_string(n) +
                          " frames");
  }
  if (n > 0 && points_found == n) {
    b.points.emplace();
    for (std::size_t i = 0; i < n; ++i) b.points->push_back(read_points(dir / frame_file(i, "pts")));
  }
  if (m.has_features) {
    b.features.emplace();
    for (std::size_t i = 0; i < n; ++i) {
      const fs::path f = dir / frame_file(i, "feat");
      if (!fs::exists(f)) throw IoError("missing feature file " + f.string());
      b.features->push_back(read_features(f));
    }
  }
  if (m.has_images) {
    b.images.emplace();
    for (std::size_t i = 0; i < n; ++i) b.images->push_back(read_image(dir / frame_file(i, "pgm")));
  }

  // Motion fields are enumerated from the directory so a wrong count is
  // reported as such rather than as a missing file.
  std::vector<std::size_t> pair_indices;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::size_t idx = 0;
    if (name.size() == 15 && name.starts_with("pair_") && name.ends_with(".mpm") &&
        std::from_chars(name.data() + 5, name.data() + 11, idx).ptr == name.data() + 11) {
      pair_indices.push_back(idx);
    }
  }
  std::sort(pair_indices.begin(), pair_indices.end());
  const std::size_t expected = n >= 1 ? n - 1 : 0;
  if (pair_indices.size() != expected) {
    throw ValidationError("expected " + std::to_string(expected) + " motion fields, found " +
                          std::to_string(pair_indices.size()));
  }
  for (std::size_t k = 0; k < expected; ++k) {
    if (pair_indices[k] != k + 1) throw ValidationError("motion field indices must run 1.." + std::to_string(expected));
    b.motion.push_back(read_motion(dir / pair_file(k + 1)));
  }

  const auto violations = validate_bundle(b);
  if (!violations.empty()) {
    std::string msg = dir.string() + ": bundle failed validation";
    for (const auto& v : violations) msg += "\n  " + to_string(v);
    throw ValidationError(msg);
  }
  return b;
}

}  // namespace denseassoc
