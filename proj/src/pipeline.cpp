#include "denseassoc/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "denseassoc/associate.hpp"
#include "denseassoc/io.hpp"

namespace denseassoc {

SweepKind parse_sweep(const std::string& s) {
  if (s == "lambda") return SweepKind::lambda;
  if (s == "backend") return SweepKind::backend;
  if (s == "mode") return SweepKind::mode;
  throw ConfigError("unknown sweep '" + s + "' (expected lambda, backend or mode)");
}

std::vector<Arm> sweep_arms(SweepKind kind, const PipelineConfig& base) {
  std::vector<Arm> arms;
  switch (kind) {
    case SweepKind::lambda:
      for (int i = 0; i <= 10; ++i) {
        PipelineConfig c = base;
        c.lambda = i / 10.0;
        arms.push_back({"lambda=" + format_number(c.lambda), c});
      }
      break;
    case SweepKind::backend:
      for (auto b : {RetrievalBackend::cosine, RetrievalBackend::euclidean, RetrievalBackend::diffusion}) {
        PipelineConfig c = base;
        c.retrieval_backend = b;
        arms.push_back({to_string(b), c});
      }
      break;
    case SweepKind::mode: {
      PipelineConfig motion = base, appearance = base, greedy = base, hungarian = base;
      motion.lambda = 1.0;
      motion.matcher = Matcher::hungarian;
      appearance.lambda = 0.0;
      appearance.matcher = Matcher::hungarian;
      greedy.matcher = Matcher::greedy;
      hungarian.matcher = Matcher::hungarian;
      arms = {{"motion-only", motion},
              {"appearance-only", appearance},
              {"fused-greedy", greedy},
              {"fused-hungarian", hungarian}};
      break;
    }
  }
  return arms;
}

ArmResult run_arm(const SceneBundle& bundle, const std::vector<Trajectory>& truth, const Arm& arm) {
  ArmResult r{arm, track_sequence(bundle, arm.config), {}};
  r.report = evaluate(r.tracks, truth, bundle.frame_count());
  return r;
}

std::vector<ArmResult> run_sweep(const SceneBundle& bundle, const std::vector<Trajectory>& truth,
                                 const std::vector<Arm>& arms, unsigned jobs) {
  std::vector<ArmResult> results(arms.size());
  jobs = std::clamp<unsigned>(jobs, 1, std::max<std::size_t>(arms.size(), 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < arms.size(); ++i) results[i] = run_arm(bundle, truth, arms[i]);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    // Arms already run side by side; keep each one's kernels single-threaded.
    omp_set_num_threads(1);
    for (std::size_t i = next++; i < arms.size(); i = next++) {
      try {
        results[i] = run_arm(bundle, truth, arms[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

double t_map_spread(const std::vector<ArmResult>& results) {
  if (results.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(results.begin(), results.end(), [](const auto& a, const auto& b) {
    return a.report.t_map < b.report.t_map;
  });
  return hi->report.t_map - lo->report.t_map;
}

std::string ablation_csv(const std::vector<ArmResult>& results) {
  const std::string spread = format_number(t_map_spread(results));
  std::ostringstream os;
  os << "setting,lambda,retrieval_backend,matcher," << csv_header() << ",sweep_spread\n";
  for (const auto& r : results) {
    os << r.arm.label << ',' << format_number(r.arm.config.lambda) << ',' << to_string(r.arm.config.retrieval_backend)
       << ',' << to_string(r.arm.config.matcher) << ',' << to_csv_row(r.report) << ',' << spread << '\n';
  }
  return os.str();
}

}  // namespace denseassoc
