#include <doctest.h>

#include <cmath>
#include <set>

#include "denseassoc/io.hpp"
#include "denseassoc/synth.hpp"
#include "scratch.hpp"

using namespace denseassoc;
namespace fs = std::filesystem;

namespace {

SceneBundle small_bundle(int frames = 3, bool images = true) {
  ScenarioConfig c;
  c.n_agents = 4;
  c.n_frames = frames;
  c.width = 48;
  c.height = 40;
  c.min_spacing = 12;
  c.feature_dim = 5;
  c.feature_noise = 0.1;
  c.emit_images = images;
  c.seed = 11;
  return generate_scenario(c).bundle;
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

bool mentions(const std::vector<Violation>& vs, std::size_t frame, const std::string& field) {
  for (const auto& v : vs)
    if (v.frame == frame && v.field == field) return true;
  return false;
}

bool mentions(const std::vector<Violation>& vs, const std::string& field) {
  for (const auto& v : vs)
    if (v.field == field) return true;
  return false;
}

}  // namespace

TEST_CASE("file naming") {
  CHECK(frame_file(7, "dmap") == "frame_000007.dmap");
  CHECK(pair_file(1) == "pair_000001.mpm");
}

TEST_CASE("bundle round trip is exact") {
  ScratchDir dir("io_roundtrip");
  const SceneBundle b = small_bundle();
  REQUIRE(validate_bundle(b).empty());
  write_bundle(b, dir.path);
  const SceneBundle back = read_bundle(dir.path);
  CHECK(back == b);
  CHECK(back.images.has_value());
}

TEST_CASE("rewriting a bundle yields identical bytes") {
  ScratchDir a("io_bytes_a"), b("io_bytes_b");
  const SceneBundle bundle = small_bundle();
  write_bundle(bundle, a.path);
  write_bundle(bundle, b.path);
  const auto names = listing(a.path);
  CHECK(names == listing(b.path));
  for (const auto& n : names) CHECK(slurp(a / n) == slurp(b / n));
}

TEST_CASE("empty bundle writes the manifest only") {
  ScratchDir dir("io_empty");
  SceneBundle b;
  b.width = 8;
  b.height = 8;
  write_bundle(b, dir.path);
  CHECK(listing(dir.path) == std::set<std::string>{"bundle.txt"});
  const SceneBundle back = read_bundle(dir.path);
  CHECK(back.frame_count() == 0);
  CHECK(back.motion.empty());
}

TEST_CASE("two-frame bundle file set") {
  ScratchDir dir("io_two");
  write_bundle(small_bundle(2, false), dir.path);
  CHECK(listing(dir.path) == std::set<std::string>{"bundle.txt", "frame_000000.dmap", "frame_000001.dmap",
                                                   "frame_000000.pts", "frame_000001.pts", "frame_000000.feat",
                                                   "frame_000001.feat", "pair_000001.mpm"});
  const Manifest m = read_manifest(dir.path);
  CHECK(m.frame_count == 2);
  CHECK(m.width == 48);
  CHECK(m.height == 40);
  CHECK(m.has_features);
  CHECK_FALSE(m.has_images);
}

TEST_CASE("missing motion field is a validation error") {
  ScratchDir dir("io_missing_mpm");
  write_bundle(small_bundle(3, false), dir.path);
  fs::remove(dir / "pair_000002.mpm");
  try {
    read_bundle(dir.path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("expected 2 motion fields") != std::string::npos);
  }
}

TEST_CASE("bad magic is a format error naming the file") {
  ScratchDir dir("io_magic");
  write_bundle(small_bundle(2, false), dir.path);
  const fs::path file = dir / "frame_000001.dmap";
  {
    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  try {
    read_bundle(dir.path);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("frame_000001.dmap") != std::string::npos);
  }
}

TEST_CASE("truncated and padded grids are format errors") {
  ScratchDir dir("io_trunc");
  DensityMap m(3, 4);
  m.at(1, 2) = 0.5f;
  write_density(m, dir / "a.dmap");
  CHECK(read_density(dir / "a.dmap") == m);
  const std::string bytes = slurp(dir / "a.dmap");
  {
    std::ofstream(dir / "short.dmap", std::ios::binary) << bytes.substr(0, bytes.size() - 1);
    std::ofstream(dir / "long.dmap", std::ios::binary) << bytes << 'x';
  }
  CHECK_THROWS_AS(read_density(dir / "short.dmap"), FormatError);
  CHECK_THROWS_AS(read_density(dir / "long.dmap"), FormatError);
  CHECK_THROWS_AS(read_density(dir / "absent.dmap"), IoError);
}

TEST_CASE("density header layout is little-endian") {
  ScratchDir dir("io_layout");
  DensityMap m(2, 3);
  m.at(0, 0) = 1.0f;
  write_density(m, dir / "a.dmap");
  const std::string b = slurp(dir / "a.dmap");
  REQUIRE(b.size() == 16 + 6 * 4);
  CHECK(b.substr(0, 4) == "DMAP");
  CHECK(b[4] == 1);
  CHECK(b[8] == 2);
  CHECK(b[12] == 3);
  // 1.0f = 0x3f800000
  CHECK(static_cast<unsigned char>(b[19]) == 0x3f);
  CHECK(static_cast<unsigned char>(b[18]) == 0x80);
}

TEST_CASE("points, features, motion and images round trip individually") {
  ScratchDir dir("io_parts");
  const FramePoints pts = {{1.5, 2.25, 0.75}, {0.1, 0.2, 1.0}};
  write_points(pts, dir / "p.pts");
  CHECK(read_points(dir / "p.pts") == pts);
  CHECK(slurp(dir / "p.pts").rfind("index,x,y,score\n", 0) == 0);

  FeatureSet f(2, 3);
  f.values() = {1, 2, 3, 4, 5, 6};
  write_features(f, dir / "f.feat");
  CHECK(read_features(dir / "f.feat") == f);

  FeatureSet none(0, 7);
  write_features(none, dir / "n.feat");
  CHECK(read_features(dir / "n.feat").count() == 0);

  MotionField mf(2, 2);
  mf.vz.at(1, 1) = 0.5f;
  mf.vx.at(0, 1) = -0.25f;
  write_motion(mf, dir / "m.mpm");
  CHECK(read_motion(dir / "m.mpm") == mf);

  Image img(2, 3);
  img.at(1, 2) = 200;
  write_image(img, dir / "i.pgm");
  CHECK(read_image(dir / "i.pgm") == img);
}

TEST_CASE("tracks csv round trip and schema checks") {
  ScratchDir dir("io_tracks");
  const std::vector<Trajectory> t = {{0, {{0, {1, 2, 0.5}}, {1, {2, 3, 0.25}}}}, {3, {{1, {4, 5, 1}}}}};
  write_tracks(t, dir / "t.csv");
  CHECK(slurp(dir / "t.csv").rfind("track_id,frame,x,y,score\n", 0) == 0);
  CHECK(read_tracks(dir / "t.csv") == t);

  std::ofstream(dir / "unsorted.csv") << "track_id,frame,x,y,score\n1,0,1,1,1\n0,0,1,1,1\n";
  std::ofstream(dir / "repeat.csv") << "track_id,frame,x,y,score\n0,1,1,1,1\n0,1,2,2,1\n";
  std::ofstream(dir / "header.csv") << "id,frame,x,y,score\n0,1,1,1,1\n";
  std::ofstream(dir / "short.csv") << "track_id,frame,x,y,score\n0,1,1\n";
  std::ofstream(dir / "text.csv") << "track_id,frame,x,y,score\n0,one,1,1,1\n";
  for (const char* bad : {"unsorted.csv", "repeat.csv", "header.csv", "short.csv", "text.csv"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(read_tracks(dir / bad), FormatError);
  }
  try {
    read_tracks(dir / "nowhere.csv");
    FAIL("expected an I/O error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nowhere.csv") != std::string::npos);
  }
}

TEST_CASE("validate_bundle accepts consistent bundles") {
  CHECK(validate_bundle(small_bundle()).empty());
  CHECK(validate_bundle(SceneBundle{}).empty());
}

TEST_CASE("validate_bundle: feature count mismatch cites the frame") {
  SceneBundle b = small_bundle(3, false);
  (*b.points)[2].resize(4);
  (*b.features)[2] = FeatureSet(5, (*b.features)[2].dim());
  const auto vs = validate_bundle(b);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].frame == 2);
  CHECK(vs[0].field == "features");
}

TEST_CASE("validate_bundle: motion norm above one cites the pixel") {
  SceneBundle b = small_bundle(2, false);
  b.motion[0].vx.at(5, 7) = 1.3f;
  b.motion[0].vy.at(5, 7) = 0.0f;
  b.motion[0].vz.at(5, 7) = 0.0f;
  const auto vs = validate_bundle(b);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].frame == 1);
  CHECK(vs[0].message.find("x=7, y=5") != std::string::npos);
}

TEST_CASE("validate_bundle checks every invariant") {
  SUBCASE("density dimensions") {
    SceneBundle b = small_bundle();
    b.density[1] = DensityMap(3, 3);
    CHECK(mentions(validate_bundle(b), 1, "density"));
  }
  SUBCASE("negative density") {
    SceneBundle b = small_bundle();
    b.density[0].at(0, 0) = -0.1f;
    CHECK(mentions(validate_bundle(b), 0, "density"));
  }
  SUBCASE("non-finite density") {
    SceneBundle b = small_bundle();
    b.density[2].at(3, 3) = NAN;
    CHECK(mentions(validate_bundle(b), 2, "density"));
  }
  SUBCASE("motion count") {
    SceneBundle b = small_bundle();
    b.motion.pop_back();
    CHECK(mentions(validate_bundle(b), "motion"));
  }
  SUBCASE("motion dimensions") {
    SceneBundle b = small_bundle();
    b.motion[0] = MotionField(2, 2);
    CHECK(mentions(validate_bundle(b), 1, "motion"));
  }
  SUBCASE("negative vz") {
    SceneBundle b = small_bundle();
    b.motion[1].vz.at(0, 0) = -0.5f;
    CHECK(mentions(validate_bundle(b), 2, "motion"));
  }
  SUBCASE("point count") {
    SceneBundle b = small_bundle();
    b.points->pop_back();
    CHECK(mentions(validate_bundle(b), "points"));
  }
  SUBCASE("point out of bounds") {
    SceneBundle b = small_bundle();
    (*b.points)[0][0].x = 48.0;
    CHECK(mentions(validate_bundle(b), 0, "points"));
  }
  SUBCASE("point score above one") {
    SceneBundle b = small_bundle();
    (*b.points)[1][0].score = 1.5;
    CHECK(mentions(validate_bundle(b), 1, "points"));
  }
  SUBCASE("feature dimension changes") {
    SceneBundle b = small_bundle();
    (*b.features)[1] = FeatureSet((*b.features)[1].count(), 9);
    CHECK(mentions(validate_bundle(b), 1, "features"));
  }
  SUBCASE("non-finite feature") {
    SceneBundle b = small_bundle();
    (*b.features)[0].values()[0] = INFINITY;
    CHECK(mentions(validate_bundle(b), 0, "features"));
  }
  SUBCASE("features without points") {
    SceneBundle b = small_bundle();
    b.points.reset();
    CHECK(mentions(validate_bundle(b), "features"));
  }
  SUBCASE("image dimensions") {
    SceneBundle b = small_bundle();
    (*b.images)[0] = Image(1, 1);
    CHECK(mentions(validate_bundle(b), 0, "images"));
  }
}

TEST_CASE("read rejects partial point sets and missing bundles") {
  ScratchDir dir("io_partial");
  write_bundle(small_bundle(2, false), dir.path);
  fs::remove(dir / "frame_000001.pts");
  CHECK_THROWS_AS(read_bundle(dir.path), ValidationError);
  CHECK_THROWS_AS(read_bundle(dir / "no_such_bundle"), IoError);
}

TEST_CASE("format_number is shortest round-trip") {
  CHECK(format_number(0.9) == "0.9");
  CHECK(format_number(1.0) == "1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
