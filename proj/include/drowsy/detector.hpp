#pragma once

// Consecutive-frame closure state machine.
//
// A frame is "closed" when its averaged EAR is strictly below the threshold.
// The Nth consecutive closed frame raises a drowsiness alert, the first open
// frame afterwards clears it, and a closure run shorter than N that ends in an
// open frame is reported as a blink. N counts frames, not seconds: at 30 FPS
// the default of 20 frames is about 0.67 s.

#include <drowsy/landmark.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drowsy {

enum class MissingFacePolicy {
  Reset,  ///< a no-face frame ends the closure run like an open frame
  Hold,   ///< a no-face frame freezes the counter and alert
};

struct DetectorConfig {
  double ear_threshold = 0.25;
  std::uint32_t frame_check = 20;
  MissingFacePolicy missing_face = MissingFacePolicy::Reset;

  /// Throws std::invalid_argument unless 0 < threshold < 1 and frame_check >= 1.
  void validate() const;
};

struct DetectorState {
  std::uint64_t closure_count = 0;
  bool alert_active = false;
  std::uint64_t frames_processed = 0;
  bool face_lost = false;
  std::optional<std::uint64_t> last_index;

  friend bool operator==(const DetectorState&, const DetectorState&) = default;
};

enum class EventKind : std::uint8_t {
  DrowsyOnset,
  AlertCleared,
  BlinkDetected,
  FaceLost,
  FaceRecovered,
};

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept;

struct DetectionEvent {
  EventKind kind = EventKind::DrowsyOnset;
  double t = 0.0;
  std::uint64_t frame_index = 0;
  std::uint32_t duration_frames = 0;  ///< BlinkDetected only, zero otherwise

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

/// Frame indices must strictly increase; anything else means a corrupted stream.
class SequenceError : public std::runtime_error {
public:
  SequenceError(const std::string& what, std::uint64_t frame_index)
      : std::runtime_error(what), frame_index_(frame_index) {}

  std::uint64_t frame_index() const noexcept { return frame_index_; }

private:
  std::uint64_t frame_index_;
};

/// A per-frame EAR, or no value when no face was found.
using EarObservation = std::optional<double>;

struct StepResult {
  DetectorState state;
  std::vector<DetectionEvent> events;
};

/// Pure transition: one frame in, next state plus emitted events out.
StepResult process_frame(DetectorState state, const DetectorConfig& config, EarObservation ear,
                         double t, std::uint64_t index);

/// Clears the counter and alert. `keep_frame_count` preserves frames_processed
/// and the sequencing position.
DetectorState reset(const DetectorState& state, bool keep_frame_count = true);

/// Stateful wrapper around process_frame for streaming consumers.
class Detector {
public:
  explicit Detector(DetectorConfig config = {});

  /// Appends this frame's events to `out`; returns how many were appended.
  std::size_t process(EarObservation ear, double t, std::uint64_t index,
                      std::vector<DetectionEvent>& out);

  const DetectorState& state() const noexcept { return state_; }
  const DetectorConfig& config() const noexcept { return config_; }
  void reset(bool keep_frame_count = true) { state_ = drowsy::reset(state_, keep_frame_count); }

private:
  DetectorConfig config_;
  DetectorState state_;
};

/// Error raised while running a whole stream; carries the failing frame ordinal.
class StreamError : public std::runtime_error {
public:
  StreamError(const std::string& what, std::uint64_t frame_index)
      : std::runtime_error("frame " + std::to_string(frame_index) + ": " + what),
        frame_index_(frame_index) {}

  std::uint64_t frame_index() const noexcept { return frame_index_; }

private:
  std::uint64_t frame_index_;
};

struct RunResult {
  std::vector<DetectionEvent> events;
  std::vector<EarObservation> ear_trace;  ///< filled only when requested
};

/// Folds the detector over a precomputed EAR sequence; frame i has timestamp
/// `timestamps[i]` (or i when `timestamps` is empty).
RunResult run_ear_sequence(std::span<const EarObservation> ears, std::span<const double> timestamps,
                           const DetectorConfig& config);

/// Full pipeline over landmark frames: extract eyes, EAR per eye, average,
/// then the state machine. Frame ordinals are positions in `frames`.
RunResult run_stream(std::span<const LandmarkFramed> frames, const DetectorConfig& config,
                     bool keep_ear_trace = false);
RunResult run_stream(std::span<const StreamRecordd> records, const DetectorConfig& config,
                     bool keep_ear_trace = false);

}  // namespace drowsy
