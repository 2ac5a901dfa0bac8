#include <drowsy/ear.hpp>
#include <drowsy/eval.hpp>
#include <drowsy/synth.hpp>

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <numeric>

using namespace drowsy;

namespace {

std::size_t count_kind(const std::vector<DetectionEvent>& events, EventKind kind) {
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [kind](const auto& e) { return e.kind == kind; }));
}

SynthConfig one_episode() {
  SynthConfig c;
  c.duration = 4.0;
  c.blink_rate = 0.0;
  c.drowsy_episodes = {{1.0, 30}};
  return c;
}

}  // namespace

TEST(EyeFromOpenness, EarIsOpennessTimesSlope) {
  EXPECT_DOUBLE_EQ(compute_ear(eye_from_openness(1.0, 40.0, 0.32)), 0.32);
  EXPECT_EQ(compute_ear(eye_from_openness(0.0, 40.0, 0.32)), 0.0);
  EXPECT_DOUBLE_EQ(compute_ear(eye_from_openness(0.5, 40.0, 0.32)), 0.16);
  for (double o = 0.0; o <= 1.0; o += 0.05) {
    for (double w : {1.0, 17.0, 40.0, 333.0}) {
      EXPECT_NEAR(compute_ear(eye_from_openness(o, w, 0.32)), o * 0.32, 1e-15);
    }
  }
}

TEST(EyeFromOpenness, DefaultGeometryStraddlesThreshold) {
  const SynthConfig c;
  EXPECT_LT(c.closed_level * c.slope, 0.25);
  EXPECT_GT(c.open_level * c.slope, 0.25);
  EXPECT_NEAR(c.closed_level * c.slope, 0.032, 1e-15);
}

TEST(Generate, OneEpisodeLabelsAndDetection) {
  const auto out = generate(one_episode());
  ASSERT_EQ(out.labels.size(), 1u);
  EXPECT_EQ(out.labels[0], (LabelRecord{LabelKind::Drowsy, 1.0, 2.0}));
  EXPECT_EQ(out.stream.size(), 120u);
  const auto events = run_stream(out.stream, DetectorConfig{0.25, 20}).events;
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].kind, EventKind::DrowsyOnset);
  EXPECT_EQ(events[0].frame_index, 30u + 19u);
  EXPECT_EQ(events[1].kind, EventKind::AlertCleared);
  EXPECT_EQ(events[1].frame_index, 60u);
}

TEST(Generate, DeterministicForSeed) {
  SynthConfig c;
  c.duration = 30;
  c.noise_sigma = 0.7;
  c.dropout_prob = 0.05;
  c.drowsy_episodes = {{10.0, 40}};
  c.seed = 42;
  EXPECT_EQ(write_stream(generate(c).stream), write_stream(generate(c).stream));
  EXPECT_EQ(write_labels(generate(c).labels), write_labels(generate(c).labels));
  auto d = c;
  d.seed = 43;
  EXPECT_NE(write_stream(generate(c).stream), write_stream(generate(d).stream));
}

TEST(Generate, NoiseDoesNotMoveBlinks) {
  SynthConfig c;
  c.duration = 60;
  c.seed = 5;
  auto noisy = c;
  noisy.noise_sigma = 2.0;
  noisy.dropout_prob = 0.2;
  EXPECT_EQ(generate(c).labels, generate(noisy).labels);
  EXPECT_EQ(generate(c).true_ear, generate(noisy).true_ear);
}

TEST(Generate, ThreeShortBlinksAreBlinksNotAlerts) {
  SynthConfig c;
  c.duration = 12.0;
  c.blink_rate = 15.0;
  c.blink_min_frames = 3;
  c.blink_max_frames = 3;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    c.seed = seed;
    const auto out = generate(c);
    if (out.labels.size() != 3) {
      continue;
    }
    found = true;
    for (const auto& l : out.labels) {
      EXPECT_EQ(l.kind, LabelKind::Blink);
      EXPECT_NEAR(l.duration() * c.fps, 3.0, 1e-9);
    }
    const auto events = run_stream(out.stream, DetectorConfig{0.25, 20}).events;
    EXPECT_EQ(count_kind(events, EventKind::BlinkDetected), 3u);
    EXPECT_EQ(count_kind(events, EventKind::DrowsyOnset), 0u);
    for (const auto& e : events) {
      if (e.kind == EventKind::BlinkDetected) {
        EXPECT_EQ(e.duration_frames, 3u);
      }
    }
  }
  EXPECT_TRUE(found);
}

TEST(Generate, CollidingEpisodesRejected) {
  auto c = one_episode();
  c.drowsy_episodes.push_back({1.5, 10});
  EXPECT_THROW(generate(c), SynthConfigError);
  c = one_episode();
  c.drowsy_episodes.push_back({2.0, 10});  // touches the first closure
  EXPECT_THROW(generate(c), SynthConfigError);
  c = one_episode();
  c.drowsy_episodes.push_back({3.9, 10});  // runs past the end
  EXPECT_THROW(generate(c), SynthConfigError);
  c = one_episode();
  c.scripted_blinks.push_back({1.2, 3});
  EXPECT_THROW(generate(c), SynthConfigError);
}

TEST(Generate, InvalidConfigRejected) {
  SynthConfig c;
  c.fps = 0;
  EXPECT_THROW(generate(c), SynthConfigError);
  c = {};
  c.closed_level = 1.5;
  EXPECT_THROW(generate(c), SynthConfigError);
  c = {};
  c.blink_min_frames = 7;
  EXPECT_THROW(generate(c), SynthConfigError);
  c = {};
  c.dropout_prob = 1.1;
  EXPECT_THROW(generate(c), SynthConfigError);
}

TEST(Generate, NoiselessClassificationMatchesSchedule) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthConfig c;
    c.duration = 60;
    c.seed = seed;
    c.drowsy_episodes = {{20.0, 45}, {40.0, 25}};
    const auto out = generate(c);
    for (double tau : {0.033, 0.1, 0.2, 0.25, 0.3, 0.3199}) {
      const auto trace = run_stream(out.stream, DetectorConfig{tau, 20}, true).ear_trace;
      ASSERT_EQ(trace.size(), out.true_ear.size());
      for (std::size_t i = 0; i < trace.size(); ++i) {
        ASSERT_EQ(*trace[i] < tau, out.true_ear[i] < tau) << "seed " << seed << " frame " << i;
      }
    }
  }
}

TEST(Generate, DrowsyLabelsContainEnoughClosedFrames) {
  SynthConfig c;
  c.duration = 30;
  c.seed = 9;
  c.drowsy_episodes = {{3.0, 20}, {10.0, 33}, {20.0, 90}};
  const auto out = generate(c);
  for (const auto& l : out.labels) {
    if (l.kind != LabelKind::Drowsy) continue;
    std::size_t closed = 0;
    for (std::size_t i = 0; i < out.stream.size(); ++i) {
      if (l.contains(out.stream[i].t) && out.true_ear[i] < 0.25) ++closed;
    }
    EXPECT_GE(closed, 20u);
    EXPECT_NEAR(static_cast<double>(closed), l.duration() * c.fps, 1e-9);
  }
}

TEST(Generate, SimilarityTransformChangesNoEvents) {
  SynthConfig c;
  c.duration = 40;
  c.seed = 11;
  c.drowsy_episodes = {{15.0, 30}};
  auto out = generate(c);
  const auto before = run_stream(out.stream, DetectorConfig{}).events;
  const Eigen::Matrix2d m = 2.7 * Eigen::Rotation2Dd(0.6).toRotationMatrix();
  for (auto& r : out.stream) {
    if (auto* eyes = std::get_if<EyePaird>(&r.payload)) {
      eyes->left = ((m * eyes->left).colwise() + Point2d(-40, 900)).eval();
      eyes->right = ((m * eyes->right).colwise() + Point2d(-40, 900)).eval();
    }
  }
  EXPECT_EQ(run_stream(out.stream, DetectorConfig{}).events, before);
}

TEST(Generate, DropoutProducesNoFaceRecords) {
  SynthConfig c;
  c.duration = 60;
  c.dropout_prob = 0.25;
  c.seed = 1;
  const auto out = generate(c);
  const auto missing = std::count_if(out.stream.begin(), out.stream.end(),
                                     [](const auto& r) { return !r.has_face(); });
  EXPECT_GT(missing, 350);
  EXPECT_LT(missing, 550);
}

// Averaged over 20 seeds, frame-level F1 does not improve as jitter grows.
TEST(Generate, NoiseMonotonicity) {
  const std::vector<double> sigmas{0.0, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> mean_f1;
  for (const double sigma : sigmas) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SynthConfig c;
      c.duration = 60;
      c.seed = seed;
      c.noise_sigma = sigma;
      c.drowsy_episodes = {{10.0, 40}, {30.0, 60}, {50.0, 30}};
      const auto out = generate(c);
      const auto report = evaluate(out.stream, out.labels, DetectorConfig{});
      total += report.f1.value_or(0.0);
    }
    mean_f1.push_back(total / 20.0);
  }
  for (std::size_t i = 1; i < mean_f1.size(); ++i) {
    EXPECT_LE(mean_f1[i], mean_f1[i - 1] + 1e-12) << "sigma " << sigmas[i];
  }
  EXPECT_EQ(mean_f1.front(), 1.0);
}
