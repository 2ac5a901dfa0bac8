#include <drowsy/detector.hpp>

#include <drowsy/ear.hpp>

#include <array>
#include <utility>

namespace drowsy {

namespace {

constexpr std::array<std::string_view, 5> kEventNames = {
    "DrowsyOnset", "AlertCleared", "BlinkDetected", "FaceLost", "FaceRecovered",
};

DetectionEvent make_event(EventKind kind, double t, std::uint64_t index,
                          std::uint32_t duration = 0) {
  return DetectionEvent{kind, t, index, duration};
}

// An open frame, or a no-face frame under the Reset policy, ends the current
// closure run. Only a genuine open frame confirms a blink.
void end_closure_run(DetectorState& state, std::vector<DetectionEvent>& events, double t,
                     std::uint64_t index, bool confirm_blink) {
  if (state.alert_active) {
    events.push_back(make_event(EventKind::AlertCleared, t, index));
  } else if (confirm_blink && state.closure_count >= 1) {
    events.push_back(make_event(EventKind::BlinkDetected, t, index,
                                static_cast<std::uint32_t>(state.closure_count)));
  }
  state.closure_count = 0;
  state.alert_active = false;
}

}  // namespace

void DetectorConfig::validate() const {
  if (!(ear_threshold > 0.0 && ear_threshold < 1.0)) {
    throw std::invalid_argument("ear threshold must lie in (0, 1), got " +
                                std::to_string(ear_threshold));
  }
  if (frame_check < 1) {
    throw std::invalid_argument("frame check must be at least 1");
  }
}

std::string_view to_string(EventKind kind) noexcept {
  return kEventNames[static_cast<std::size_t>(kind)];
}

std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == name) {
      return static_cast<EventKind>(i);
    }
  }
  return std::nullopt;
}

StepResult process_frame(DetectorState state, const DetectorConfig& config, EarObservation ear,
                         double t, std::uint64_t index) {
  if (state.last_index && index <= *state.last_index) {
    throw SequenceError("frame index " + std::to_string(index) + " does not follow " +
                            std::to_string(*state.last_index),
                        index);
  }
  state.last_index = index;
  ++state.frames_processed;

  StepResult result;
  auto& events = result.events;

  if (!ear) {
    if (!state.face_lost) {
      events.push_back(make_event(EventKind::FaceLost, t, index));
      state.face_lost = true;
    }
    if (config.missing_face == MissingFacePolicy::Reset) {
      end_closure_run(state, events, t, index, /*confirm_blink=*/false);
    }
    result.state = state;
    return result;
  }

  if (state.face_lost) {
    events.push_back(make_event(EventKind::FaceRecovered, t, index));
    state.face_lost = false;
  }

  if (*ear < config.ear_threshold) {
    ++state.closure_count;
    if (state.closure_count == config.frame_check) {
      state.alert_active = true;
      events.push_back(make_event(EventKind::DrowsyOnset, t, index));
    }
  } else {
    end_closure_run(state, events, t, index, /*confirm_blink=*/true);
  }

  result.state = state;
  return result;
}

DetectorState reset(const DetectorState& state, bool keep_frame_count) {
  DetectorState out;
  if (keep_frame_count) {
    out.frames_processed = state.frames_processed;
    out.last_index = state.last_index;
    out.face_lost = state.face_lost;
  }
  return out;
}

Detector::Detector(DetectorConfig config) : config_(config) { config_.validate(); }

std::size_t Detector::process(EarObservation ear, double t, std::uint64_t index,
                              std::vector<DetectionEvent>& out) {
  auto step = process_frame(state_, config_, ear, t, index);
  state_ = step.state;
  out.insert(out.end(), step.events.begin(), step.events.end());
  return step.events.size();
}

RunResult run_ear_sequence(std::span<const EarObservation> ears, std::span<const double> timestamps,
                           const DetectorConfig& config) {
  if (!timestamps.empty() && timestamps.size() != ears.size()) {
    throw std::invalid_argument("timestamp count does not match EAR count");
  }
  Detector detector(config);
  RunResult result;
  for (std::size_t i = 0; i < ears.size(); ++i) {
    const double t = timestamps.empty() ? static_cast<double>(i) : timestamps[i];
    detector.process(ears[i], t, i, result.events);
  }
  return result;
}

namespace {

template <typename Frame, typename EarFn>
RunResult fold_frames(std::span<const Frame> frames, const DetectorConfig& config,
                      bool keep_ear_trace, EarFn&& ear_of) {
  Detector detector(config);
  RunResult result;
  if (keep_ear_trace) {
    result.ear_trace.reserve(frames.size());
  }
  double last_t = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& frame = frames[i];
    if (i > 0 && frame.t < last_t) {
      throw StreamError("timestamp " + std::to_string(frame.t) + " precedes " +
                            std::to_string(last_t),
                        i);
    }
    last_t = frame.t;
    EarObservation ear;
    try {
      ear = ear_of(frame);
    } catch (const DegenerateEye& e) {
      throw StreamError(e.what(), i);
    } catch (const LandmarkError& e) {
      throw StreamError(e.what(), i);
    }
    detector.process(ear, frame.t, i, result.events);
    if (keep_ear_trace) {
      result.ear_trace.push_back(ear);
    }
  }
  return result;
}

}  // namespace

RunResult run_stream(std::span<const LandmarkFramed> frames, const DetectorConfig& config,
                     bool keep_ear_trace) {
  return fold_frames(frames, config, keep_ear_trace, [](const LandmarkFramed& f) -> EarObservation {
    if (!f.face) {
      return std::nullopt;
    }
    return frame_ear(extract_eyes(*f.face));
  });
}

RunResult run_stream(std::span<const StreamRecordd> records, const DetectorConfig& config,
                     bool keep_ear_trace) {
  return fold_frames(records, config, keep_ear_trace,
                     [](const StreamRecordd& r) { return record_ear(r); });
}

}  // namespace drowsy
