#pragma once

// Interchange formats between model producers, the synthetic generator, the
// tracker and the metric suite.
//
//   bundle.txt          key=value manifest (frame_count, width, height,
//                       has_features, has_images)
//   frame_%06d.dmap     "DMAP", u32 version=1, u32 height, u32 width,
//                       H*W float32 LE, row-major
//   pair_%06d.mpm       "MPMF", u32 version=1, u32 height, u32 width,
//                       planes vx, vy, vz (H*W float32 LE each); the index is
//                       the later frame of the pair
//   frame_%06d.pts      CSV "index,x,y,score"
//   frame_%06d.feat     "FEAT", u32 version=1, u32 count, u32 dim,
//                       count*dim float32 LE
//   frame_%06d.pgm      binary 8-bit grayscale PGM (optional raw images)
//   tracks.csv          CSV "track_id,frame,x,y,score" sorted by (id, frame)

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "denseassoc/types.hpp"

namespace denseassoc {

struct Manifest {
  std::size_t frame_count = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  bool has_features = false;
  bool has_images = false;
};

struct Violation {
  std::optional<std::size_t> frame;
  std::string field;
  std::string message;
};

std::string to_string(const Violation& v);

/// Checks every SceneBundle invariant. Each violation names the frame and
/// field; grid checks report the first offending pixel per grid.
std::vector<Violation> validate_bundle(const SceneBundle& bundle);

void write_bundle(const SceneBundle& bundle, const std::filesystem::path& dir);

/// Throws FormatError (bad magic/version/syntax), ValidationError (invariant
/// violations) or IoError (missing or unreadable files).
SceneBundle read_bundle(const std::filesystem::path& dir);

Manifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const Manifest& m, const std::filesystem::path& dir);

std::string frame_file(std::size_t frame, const char* ext);
std::string pair_file(std::size_t later_frame);

void write_density(const DensityMap& map, const std::filesystem::path& file);
DensityMap read_density(const std::filesystem::path& file);

void write_motion(const MotionField& field, const std::filesystem::path& file);
MotionField read_motion(const std::filesystem::path& file);

void write_features(const FeatureSet& features, const std::filesystem::path& file);
FeatureSet read_features(const std::filesystem::path& file);

void write_points(const FramePoints& points, const std::filesystem::path& file);
FramePoints read_points(const std::filesystem::path& file);

void write_image(const Image& image, const std::filesystem::path& file);
Image read_image(const std::filesystem::path& file);

void write_ppm(const RgbImage& image, const std::filesystem::path& file);

void write_tracks(const std::vector<Trajectory>& tracks, const std::filesystem::path& file);
/// Rejects unsorted rows, repeated frames within a track, and bad syntax.
std::vector<Trajectory> read_tracks(const std::filesystem::path& file);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace denseassoc
