#pragma once

// Detection metrics against ground-truth labels, and the (threshold, frames)
// parameter sweep.
//
// Frame level: each frame is predicted drowsy while an alert is active and
// actually drowsy when its timestamp falls inside a drowsy label. Event
// level: DrowsyOnset events are matched greedily, in time order, to the
// earliest unmatched drowsy label whose window [start - delta, end] holds
// the onset time. Blink events are matched the same way against blink
// labels and reported separately.
//
// Any ratio whose denominator is zero is undefined (an empty optional),
// never silently 0 or 1.

#include <drowsy/detector.hpp>
#include <drowsy/stream_io.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drowsy {

using Metric = std::optional<double>;

inline constexpr double kDefaultMatchWindow = 0.5;

struct FramePair {
  bool predicted = false;
  bool actual = false;

  friend bool operator==(const FramePair&, const FramePair&) = default;
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct EventCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

struct EvalReport {
  ConfusionCounts frames;
  Metric accuracy;
  Metric precision;
  Metric recall;
  Metric f1;
  Metric fpr;
  Metric fnr;

  EventCounts events;
  Metric event_precision;
  Metric event_recall;
  Metric event_f1;

  EventCounts blinks;
  Metric blink_precision;
  Metric blink_recall;
  Metric blink_f1;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

Metric ratio(std::uint64_t numerator, std::uint64_t denominator);
Metric f1_from(Metric precision, Metric recall);

/// Where an alert's predicted span begins. `backdate` > 0 extends each span
/// backwards by that many frames from the onset frame; with backdate N - 1
/// the span covers the whole closure run that triggered the alert (exact
/// under the Reset policy, since the run is N consecutive frames).
struct FrameAttribution {
  std::uint32_t backdate = 0;

  static FrameAttribution from_onset() { return {0}; }
  static FrameAttribution from_closure_start(const DetectorConfig& c) {
    return {c.frame_check - 1};
  }
};

/// Per-frame (predicted, actual). A predicted span runs from its onset frame
/// (inclusive) to the matching AlertCleared frame (exclusive), or to the end
/// of the timeline if the alert never clears.
std::vector<FramePair> frame_labels(std::span<const DetectionEvent> events,
                                    std::span<const LabelRecord> labels,
                                    std::span<const double> timestamps,
                                    FrameAttribution attribution = {});

ConfusionCounts count_frames(std::span<const FramePair> pairs);

/// Greedy, injective, time-ordered matching of detections to labels.
EventCounts match_events(std::span<const double> detection_times,
                         std::span<const LabelRecord> labels, double match_window);

EvalReport score(std::span<const FramePair> pairs, std::span<const DetectionEvent> events,
                 std::span<const LabelRecord> labels, double match_window = kDefaultMatchWindow);

/// Detection plus scoring in one pass, with closure-start attribution.
EvalReport evaluate(std::span<const StreamRecordd> stream, std::span<const LabelRecord> labels,
                    const DetectorConfig& config, double match_window = kDefaultMatchWindow);

/// Scoring of precomputed events; frames attributed per `config`.
EvalReport evaluate_events(std::span<const DetectionEvent> events,
                           std::span<const LabelRecord> labels, std::span<const double> timestamps,
                           const DetectorConfig& config,
                           double match_window = kDefaultMatchWindow);

struct SweepGrid {
  std::vector<double> thresholds;
  std::vector<std::uint32_t> frame_checks;

  /// Thresholds 0.15..0.35 step 0.01, frame checks 5..40.
  static SweepGrid defaults();
};

struct SweepCell {
  double threshold = 0.0;
  std::uint32_t frame_check = 0;
  EvalReport report;

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepResult {
  std::vector<SweepCell> cells;  ///< threshold-major, grid order
  std::size_t best = 0;

  const SweepCell& best_cell() const { return cells.at(best); }
  /// Every cell tied with the best on (event f1, frame f1).
  std::vector<const SweepCell*> optimal_region() const;
};

struct SweepOptions {
  MissingFacePolicy missing_face = MissingFacePolicy::Reset;
  double match_window = kDefaultMatchWindow;
  unsigned threads = 1;
};

/// One detector run and score per cell. Output does not depend on `threads`.
SweepResult sweep(std::span<const StreamRecordd> stream, std::span<const LabelRecord> labels,
                  const SweepGrid& grid, const SweepOptions& options = {});

std::string format_metric(Metric m);

/// CSV: tau,N,accuracy,precision,recall,f1,fpr,fnr,event_f1 with NA for undefined.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_table(std::ostream& out, const SweepResult& result);
void write_report_table(std::ostream& out, const EvalReport& report);
void write_report_csv(std::ostream& out, const EvalReport& report, const DetectorConfig& config);

}  // namespace drowsy
