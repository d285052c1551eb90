// denseassoc: synthesize scenes, track, evaluate, run ablations, render overlays.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data, validation
// or I/O error, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "denseassoc/associate.hpp"
#include "denseassoc/io.hpp"
#include "denseassoc/metrics.hpp"
#include "denseassoc/pipeline.hpp"
#include "denseassoc/synth.hpp"

namespace fs = std::filesystem;
using namespace denseassoc;

namespace {

struct ConfigFlags {
  PipelineConfig cfg;
  std::string backend = to_string(cfg.retrieval_backend);
  std::string matcher = to_string(cfg.matcher);

  void attach(CLI::App* app) {
    app->add_option("--lambda", cfg.lambda, "motion weight in the fused score, in [0,1]");
    app->add_option("--retrieval-backend,--retrieval", backend, "appearance similarity: diffusion|cosine|euclidean");
    app->add_option("--matcher", matcher, "assignment solver: hungarian|greedy");
    app->add_option("--gate-score", cfg.gate_score, "pairs scoring below this start new tracks");
    app->add_option("--peak-window", cfg.peaks.window, "odd local-maximum window side");
    app->add_option("--peak-rel-threshold", cfg.peaks.rel_threshold, "peak floor relative to the frame maximum");
    app->add_option("--peak-abs-threshold", cfg.peaks.abs_threshold, "absolute peak floor");
    app->add_option("--patch-size", cfg.patch_size, "appearance patch side in pixels");
    app->add_option("--diffusion-alpha", cfg.diffusion.alpha, "diffusion damping in (0,1)");
    app->add_option("--diffusion-knn", cfg.diffusion.knn_k, "mutual nearest neighbours per node");
    app->add_option("--diffusion-gamma", cfg.diffusion.gamma, "affinity exponent");
    app->add_option("--diffusion-max-iterations", cfg.diffusion.max_iterations, "conjugate-gradient iteration cap");
    app->add_option("--diffusion-tolerance", cfg.diffusion.tolerance, "conjugate-gradient relative tolerance");
    app->add_option("--seed", cfg.seed, "pipeline seed");
  }

  PipelineConfig resolve() {
    cfg.retrieval_backend = parse_backend(backend);
    cfg.matcher = parse_matcher(matcher);
    cfg.validate();
    return cfg;
  }
};

// Scenario flags override the preset only when given on the command line.
struct SynthFlags {
  ScenarioConfig given;
  std::string preset;
  std::string out;
  std::vector<std::pair<CLI::Option*, std::function<void(ScenarioConfig&)>>> overrides;

  template <class T>
  CLI::Option* bind(CLI::App* app, const std::string& name, T ScenarioConfig::*field, const std::string& help) {
    CLI::Option* opt = nullptr;
    if constexpr (std::is_same_v<T, bool>)
      opt = app->add_flag(name, given.*field, help);
    else
      opt = app->add_option(name, given.*field, help);
    overrides.emplace_back(opt, [this, field](ScenarioConfig& c) { c.*field = given.*field; });
    return opt;
  }

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "start from a named scenario: standard-crowded")
        ->check(CLI::IsMember({"standard-crowded"}));
    bind(app, "--agents", &ScenarioConfig::n_agents, "number of agents")->check(CLI::NonNegativeNumber);
    bind(app, "--frames", &ScenarioConfig::n_frames, "number of frames")->check(CLI::NonNegativeNumber);
    bind(app, "--width", &ScenarioConfig::width, "frame width");
    bind(app, "--height", &ScenarioConfig::height, "frame height");
    bind(app, "--speed", &ScenarioConfig::speed_mean, "mean speed in px/frame");
    bind(app, "--speed-jitter", &ScenarioConfig::speed_jitter, "per-frame uniform jitter half-width");
    bind(app, "--sigma", &ScenarioConfig::blob_sigma, "density blob sigma");
    bind(app, "--min-spacing", &ScenarioConfig::min_spacing, "minimum pairwise agent distance");
    bind(app, "--feature-dim", &ScenarioConfig::feature_dim, "appearance vector dimension");
    bind(app, "--feature-noise", &ScenarioConfig::feature_noise, "appearance noise level");
    bind(app, "--distractor-correlation", &ScenarioConfig::distractor_correlation,
         "maximum cosine between agent appearances");
    bind(app, "--seed", &ScenarioConfig::seed, "random seed");
    bind(app, "--images", &ScenarioConfig::emit_images, "also write grayscale frames");
    app->add_option("--out", out, "output bundle directory")->required();
  }

  ScenarioConfig resolve() const {
    ScenarioConfig c = preset.empty() ? ScenarioConfig{} : standard_crowded_scenario();
    for (const auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(c);
    c.validate();
    return c;
  }
};

int cmd_synth(const SynthFlags& flags) {
  const ScenarioConfig cfg = flags.resolve();
  const Scenario s = generate_scenario(cfg);
  write_bundle(s.bundle, flags.out);
  write_tracks(s.truth, fs::path(flags.out) / "gt_tracks.csv");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(flags.out))
    if (e.is_regular_file()) ++files;
  std::cout << "agents=" << cfg.n_agents << "\nframes=" << cfg.n_frames << "\nfiles=" << files
            << "\nout=" << flags.out << '\n';
  return 0;
}

int cmd_track(ConfigFlags& flags, const std::string& bundle_dir, const std::string& out) {
  const PipelineConfig cfg = flags.resolve();
  std::cout << describe(cfg);
  const SceneBundle bundle = read_bundle(bundle_dir);
  const auto tracks = track_sequence(bundle, cfg);
  write_tracks(tracks, out);
  std::cout << "frames=" << bundle.frame_count() << "\ntracks=" << tracks.size() << "\nout=" << out << '\n';
  return 0;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw IoError("cannot write " + file.string());
  os << text;
  if (!os) throw IoError("failed writing " + file.string());
}

int cmd_eval(const std::string& tracks_file, const std::string& gt_file, const std::string& bundle_dir,
             const std::string& out, const std::string& csv) {
  const Manifest m = read_manifest(bundle_dir);
  const auto pred = read_tracks(tracks_file);
  const auto gt = read_tracks(gt_file);
  const MetricReport r = evaluate(pred, gt, m.frame_count);
  const std::string kv = to_key_value(r);
  std::cout << kv;
  if (!out.empty()) write_text(out, kv);
  if (!csv.empty()) write_text(csv, csv_header() + "\n" + to_csv_row(r) + "\n");
  return 0;
}

int cmd_ablate(ConfigFlags& flags, const std::string& bundle_dir, std::string gt_file, const std::string& sweep,
               const std::string& out, unsigned jobs) {
  const SweepKind kind = parse_sweep(sweep);
  const PipelineConfig base = flags.resolve();
  std::cout << describe(base) << "sweep=" << sweep << "\njobs=" << jobs << '\n';
  const SceneBundle bundle = read_bundle(bundle_dir);
  if (gt_file.empty()) gt_file = (fs::path(bundle_dir) / "gt_tracks.csv").string();
  const auto gt = read_tracks(gt_file);
  const auto results = run_sweep(bundle, gt, sweep_arms(kind, base), jobs);
  const std::string table = ablation_csv(results);
  std::cout << table;
  if (!out.empty()) write_text(out, table);
  return 0;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  std::size_t a = 0, b = 0;
  try {
    if (dots == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    a = std::stoul(s.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument(s);
    const std::string tail = s.substr(dots + 2);
    b = std::stoul(tail, &used);
    if (used != tail.size()) throw std::invalid_argument(s);
  } catch (const std::logic_error&) {
    throw ConfigError("frame range must look like A..B, got '" + s + "'");
  }
  if (b < a) throw ConfigError("frame range " + s + " is reversed");
  return {a, b};
}

int cmd_render(const std::string& bundle_dir, const std::string& tracks_file, const std::string& range,
               const std::string& out) {
  const auto [first, last] = parse_range(range);
  const SceneBundle bundle = read_bundle(bundle_dir);
  if (last > bundle.frame_count()) {
    throw std::out_of_range("frame range " + range + " exceeds the bundle's " +
                            std::to_string(bundle.frame_count()) + " frames");
  }
  const auto tracks = tracks_file.empty() ? std::vector<Trajectory>{} : read_tracks(tracks_file);
  fs::create_directories(out);
  for (std::size_t f = first; f < last; ++f) write_ppm(render_overlay(bundle, tracks, f), fs::path(out) / frame_file(f, "ppm"));
  std::cout << "rendered=" << (last - first) << "\nout=" << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense crowd tracking by counting"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene bundle with ground truth");
  synth->option_defaults()->always_capture_default();
  synth_flags.attach(synth);

  ConfigFlags track_flags;
  std::string track_bundle, track_out;
  CLI::App* track = app.add_subcommand("track", "track every frame pair of a bundle");
  track->option_defaults()->always_capture_default();
  track->add_option("--bundle", track_bundle, "bundle directory")->required();
  track->add_option("--out", track_out, "trajectory CSV to write")->required();
  track_flags.attach(track);

  std::string eval_tracks, eval_gt, eval_bundle, eval_out, eval_csv;
  CLI::App* eval = app.add_subcommand("eval", "score trajectories against ground truth");
  eval->add_option("--tracks", eval_tracks, "predicted trajectory CSV")->required();
  eval->add_option("--gt", eval_gt, "ground-truth trajectory CSV")->required();
  eval->add_option("--bundle", eval_bundle, "bundle directory (frame count)")->required();
  eval->add_option("--out", eval_out, "key=value report to write");
  eval->add_option("--csv", eval_csv, "one-row CSV report to write");

  ConfigFlags ablate_flags;
  std::string ablate_bundle, ablate_gt, ablate_sweep, ablate_out;
  unsigned jobs = 1;
  CLI::App* ablate = app.add_subcommand("ablate", "sweep lambda, retrieval backend or tracking mode");
  ablate->option_defaults()->always_capture_default();
  ablate->add_option("--bundle", ablate_bundle, "bundle directory")->required();
  ablate->add_option("--gt", ablate_gt, "ground truth (default: <bundle>/gt_tracks.csv)");
  ablate->add_option("--sweep", ablate_sweep, "lambda|backend|mode")->required();
  ablate->add_option("--out", ablate_out, "ablation CSV to write");
  ablate->add_option("--jobs", jobs, "concurrent arms")->envname("DENSEASSOC_JOBS")->check(CLI::PositiveNumber);
  ablate_flags.attach(ablate);

  std::string render_bundle, render_tracks, render_frames, render_out;
  CLI::App* render = app.add_subcommand("render", "draw trajectories over density frames");
  render->add_option("--bundle", render_bundle, "bundle directory")->required();
  render->add_option("--tracks", render_tracks, "trajectory CSV (omit for background only)");
  render->add_option("--frames", render_frames, "half-open range A..B")->required();
  render->add_option("--out", render_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth) return cmd_synth(synth_flags);
    if (*track) return cmd_track(track_flags, track_bundle, track_out);
    if (*eval) return cmd_eval(eval_tracks, eval_gt, eval_bundle, eval_out, eval_csv);
    if (*ablate) return cmd_ablate(ablate_flags, ablate_bundle, ablate_gt, ablate_sweep, ablate_out, jobs);
    if (*render) return cmd_render(render_bundle, render_tracks, render_frames, render_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
