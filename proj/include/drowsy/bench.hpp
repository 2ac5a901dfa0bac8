#pragma once

// Per-frame latency and throughput of the detection pipeline.
//
// Two paths are timed. Compute-only runs over pre-parsed records (EAR plus
// state machine). End-to-end starts from serialized text and adds line
// parsing. Input serialization is done once up front and never timed.

#include <drowsy/detector.hpp>
#include <drowsy/landmark.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace drowsy {

inline constexpr std::size_t kMinBenchFrames = 10'000;
inline constexpr double kRealTimeBudgetNs = 33.3e6;

class BenchError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct RunTiming {
  std::uint64_t frames = 0;
  double wall_ns = 0.0;
  double mean_ns = 0.0;
  double p50_ns = 0.0;
  double p99_ns = 0.0;
  double max_ns = 0.0;

  double throughput() const noexcept { return wall_ns > 0.0 ? frames / (wall_ns * 1e-9) : 0.0; }
};

struct PathReport {
  std::vector<RunTiming> runs;
  std::size_t best = 0;  ///< run with the smallest wall time

  const RunTiming& best_run() const { return runs.at(best); }
};

struct BenchReport {
  std::uint64_t frames_processed = 0;
  double budget_ns = kRealTimeBudgetNs;
  PathReport compute;
  PathReport end_to_end;
  std::vector<DetectionEvent> events;  ///< from the last compute-only run

  unsigned parallel_streams = 0;
  double parallel_wall_ns = 0.0;
  double parallel_throughput = 0.0;

  bool within_budget() const { return compute.best_run().p99_ns < budget_ns; }
};

struct BenchOptions {
  unsigned repetitions = 3;
  double budget_ns = kRealTimeBudgetNs;
  unsigned parallel_streams = 0;  ///< 0 skips the aggregate-capacity run
};

/// Throws BenchError when the stream is shorter than kMinBenchFrames or
/// repetitions is zero.
BenchReport run_bench(std::span<const StreamRecordd> stream, const DetectorConfig& config,
                      const BenchOptions& options = {});

/// Nearest-rank percentile of unsorted samples; q in [0, 1].
double percentile(std::vector<double> samples, double q);

void write_bench_report(std::ostream& out, const BenchReport& report);
void write_bench_csv(std::ostream& out, const BenchReport& report);

}  // namespace drowsy
