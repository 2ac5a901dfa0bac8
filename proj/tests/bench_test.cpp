#include <drowsy/bench.hpp>
#include <drowsy/synth.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace drowsy;

namespace {

std::vector<StreamRecordd> frames(double seconds) {
  SynthConfig c;
  c.duration = seconds;
  c.seed = 2;
  c.noise_sigma = 0.3;
  if (seconds > 70.0) c.drowsy_episodes = {{60.0, 40}};
  return generate(c).stream;
}

}  // namespace

TEST(Percentile, NearestRank) {
  EXPECT_EQ(percentile({5, 1, 4, 2, 3}, 0.5), 3.0);
  EXPECT_EQ(percentile({5, 1, 4, 2, 3}, 1.0), 5.0);
  EXPECT_EQ(percentile({5, 1, 4, 2, 3}, 0.0), 1.0);
  std::vector<double> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[i] = i + 1;
  EXPECT_EQ(percentile(hundred, 0.99), 99.0);
  EXPECT_EQ(percentile({}, 0.5), 0.0);
}

TEST(RunBench, RefusesShortStreams) {
  EXPECT_THROW(run_bench(frames(10), DetectorConfig{}), BenchError);
}

TEST(RunBench, SingleRepetition) {
  const auto stream = frames(400);
  BenchOptions opt;
  opt.repetitions = 1;
  const auto report = run_bench(stream, DetectorConfig{}, opt);
  EXPECT_EQ(report.frames_processed, stream.size());
  ASSERT_EQ(report.compute.runs.size(), 1u);
  ASSERT_EQ(report.end_to_end.runs.size(), 1u);
  EXPECT_EQ(report.compute.best, 0u);
  EXPECT_EQ(report.end_to_end.best_run().frames, stream.size());
  EXPECT_THROW(run_bench(stream, DetectorConfig{}, BenchOptions{0}), BenchError);
}

TEST(RunBench, ReportInvariantsAndUnchangedOutput) {
  const auto stream = frames(400);
  const auto report = run_bench(stream, DetectorConfig{});
  ASSERT_EQ(report.compute.runs.size(), 3u);
  for (const auto* path : {&report.compute, &report.end_to_end}) {
    for (const auto& r : path->runs) {
      EXPECT_LE(r.p50_ns, r.p99_ns);
      EXPECT_LE(r.p99_ns, r.max_ns);
      EXPECT_NEAR(r.throughput(), r.frames / (r.wall_ns * 1e-9), 1e-6 * r.throughput());
    }
    for (const auto& r : path->runs) EXPECT_LE(path->best_run().wall_ns, r.wall_ns);
  }
  EXPECT_EQ(report.events, run_stream(stream, DetectorConfig{}).events);
  EXPECT_EQ(run_bench(stream, DetectorConfig{}).frames_processed, report.frames_processed);

  std::ostringstream text, csv;
  write_bench_report(text, report);
  write_bench_csv(csv, report);
  EXPECT_NE(text.str().find("real-time budget"), std::string::npos);
  const auto rows = csv.str();
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 7);
}

TEST(RunBench, ParallelStreams) {
  BenchOptions opt;
  opt.repetitions = 1;
  opt.parallel_streams = 2;
  const auto report = run_bench(frames(400), DetectorConfig{}, opt);
  EXPECT_EQ(report.parallel_streams, 2u);
  EXPECT_GT(report.parallel_throughput, 0.0);
}
