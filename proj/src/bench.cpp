#include <drowsy/bench.hpp>

#include <drowsy/ear.hpp>
#include <drowsy/stream_io.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace drowsy {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
}

RunTiming summarize(std::vector<double>& latencies, double wall_ns) {
  RunTiming t;
  t.frames = latencies.size();
  t.wall_ns = wall_ns;
  if (latencies.empty()) {
    return t;
  }
  t.mean_ns = std::accumulate(latencies.begin(), latencies.end(), 0.0) /
              static_cast<double>(latencies.size());
  t.max_ns = *std::max_element(latencies.begin(), latencies.end());
  t.p50_ns = percentile(latencies, 0.50);
  t.p99_ns = percentile(latencies, 0.99);
  return t;
}

std::size_t fastest(const std::vector<RunTiming>& runs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].wall_ns < runs[best].wall_ns) {
      best = i;
    }
  }
  return best;
}

RunTiming compute_run(std::span<const StreamRecordd> stream, const DetectorConfig& config,
                      std::vector<DetectionEvent>& events) {
  std::vector<double> latencies(stream.size());
  events.clear();
  Detector detector(config);
  const auto start = Clock::now();
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto t0 = Clock::now();
    detector.process(record_ear(stream[i]), stream[i].t, i, events);
    latencies[i] = elapsed_ns(t0, Clock::now());
  }
  const double wall = elapsed_ns(start, Clock::now());
  return summarize(latencies, wall);
}

RunTiming end_to_end_run(const std::string& text, const DetectorConfig& config,
                         std::size_t expected_frames) {
  std::vector<double> latencies;
  latencies.reserve(expected_frames);
  std::vector<DetectionEvent> events;
  std::istringstream in(text);
  StreamReader reader(in);
  Detector detector(config);
  std::uint64_t index = 0;
  const auto start = Clock::now();
  for (;;) {
    const auto t0 = Clock::now();
    auto record = reader.next();
    if (!record) {
      break;
    }
    detector.process(record_ear(*record), record->t, index++, events);
    latencies.push_back(elapsed_ns(t0, Clock::now()));
  }
  const double wall = elapsed_ns(start, Clock::now());
  return summarize(latencies, wall);
}

}  // namespace

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) {
    return 0.0;
  }
  const double clamped = std::clamp(q, 0.0, 1.0);
  auto rank = static_cast<std::size_t>(std::ceil(clamped * static_cast<double>(samples.size())));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  auto nth = samples.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(samples.begin(), nth, samples.end());
  return *nth;
}

BenchReport run_bench(std::span<const StreamRecordd> stream, const DetectorConfig& config,
                      const BenchOptions& options) {
  if (stream.size() < kMinBenchFrames) {
    throw BenchError("benchmark needs at least " + std::to_string(kMinBenchFrames) +
                     " frames, got " + std::to_string(stream.size()));
  }
  if (options.repetitions == 0) {
    throw BenchError("repetitions must be at least 1");
  }
  config.validate();

  BenchReport report;
  report.frames_processed = stream.size();
  report.budget_ns = options.budget_ns;

  for (unsigned r = 0; r < options.repetitions; ++r) {
    report.compute.runs.push_back(compute_run(stream, config, report.events));
  }
  report.compute.best = fastest(report.compute.runs);

  std::ostringstream serialized;
  write_stream(serialized, std::vector<StreamRecordd>(stream.begin(), stream.end()));
  const std::string text = serialized.str();
  for (unsigned r = 0; r < options.repetitions; ++r) {
    report.end_to_end.runs.push_back(end_to_end_run(text, config, stream.size()));
  }
  report.end_to_end.best = fastest(report.end_to_end.runs);

  if (options.parallel_streams > 0) {
    report.parallel_streams = options.parallel_streams;
    const auto start = Clock::now();
    {
      std::vector<std::jthread> workers;
      for (unsigned s = 0; s < options.parallel_streams; ++s) {
        workers.emplace_back([&] {
          std::vector<DetectionEvent> events;
          compute_run(stream, config, events);
        });
      }
    }
    report.parallel_wall_ns = elapsed_ns(start, Clock::now());
    report.parallel_throughput = static_cast<double>(options.parallel_streams) *
                                 static_cast<double>(stream.size()) /
                                 (report.parallel_wall_ns * 1e-9);
  }
  return report;
}

namespace {

void write_path(std::ostream& out, const char* name, const PathReport& path) {
  out << name << '\n';
  for (std::size_t i = 0; i < path.runs.size(); ++i) {
    const auto& r = path.runs[i];
    out << "  run " << i + 1 << (i == path.best && path.runs.size() > 1 ? " (best)" : "")
        << ": wall " << r.wall_ns / 1e6 << " ms, mean " << r.mean_ns << " ns, p50 " << r.p50_ns
        << " ns, p99 " << r.p99_ns << " ns, max " << r.max_ns << " ns, " << r.throughput()
        << " frames/s\n";
  }
}

}  // namespace

void write_bench_report(std::ostream& out, const BenchReport& report) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(1);
  out << "frames per run    " << report.frames_processed << '\n';
  write_path(out, "compute-only (pre-parsed)", report.compute);
  write_path(out, "end-to-end (parse + compute)", report.end_to_end);
  if (report.parallel_streams > 0) {
    out << "parallel          " << report.parallel_streams << " streams, "
        << report.parallel_throughput << " frames/s aggregate\n";
  }
  const auto& best = report.compute.best_run();
  out << "real-time budget  " << report.budget_ns / 1e6 << " ms/frame; best p99 "
      << best.p99_ns / 1e6 << " ms -> " << (report.within_budget() ? "PASS" : "FAIL") << '\n';
  out.flags(flags);
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "path,run,frames,wall_ns,mean_ns,p50_ns,p99_ns,max_ns,throughput\n";
  auto rows = [&](const char* name, const PathReport& path) {
    for (std::size_t i = 0; i < path.runs.size(); ++i) {
      const auto& r = path.runs[i];
      out << name << ',' << i + 1 << ',' << r.frames << ',' << r.wall_ns << ',' << r.mean_ns
          << ',' << r.p50_ns << ',' << r.p99_ns << ',' << r.max_ns << ',' << r.throughput()
          << '\n';
    }
  };
  rows("compute", report.compute);
  rows("end_to_end", report.end_to_end);
}

}  // namespace drowsy
