#pragma once

// Seeded synthetic eye streams with exact ground truth.
//
// Eye geometry is linear in openness: an eye of width w and openness o has
// lid offsets of +/- o*slope*w/2 at one and two thirds of its width, so its
// EAR is exactly o*slope. Closures are scheduled first and recorded as
// labels; landmark noise and face dropouts are applied afterwards and never
// touch the labels or the true EAR trace.
//
// Randomness comes from std::mt19937_64 and the standard distributions, so
// output is reproducible for a given seed on a given standard library but is
// not promised to be bit-identical across library implementations.

#include <drowsy/landmark.hpp>
#include <drowsy/stream_io.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace drowsy {

/// A scheduled closure: start time in seconds, length in frames.
struct Closure {
  double start = 0.0;
  std::uint32_t frames = 0;
};

struct SynthConfig {
  double fps = 30.0;
  double duration = 60.0;
  double eye_width = 40.0;
  double slope = 0.32;
  double open_level = 1.0;
  double closed_level = 0.1;
  double blink_rate = 15.0;  ///< mean blinks per minute, Poisson onsets
  std::uint32_t blink_min_frames = 2;
  std::uint32_t blink_max_frames = 6;
  std::vector<Closure> drowsy_episodes;
  std::vector<Closure> scripted_blinks;  ///< placed verbatim, before random blinks
  double noise_sigma = 0.0;              ///< px, isotropic Gaussian per coordinate
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;

  /// Throws SynthConfigError on invalid values.
  void validate() const;
};

class SynthConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct SynthOutput {
  std::vector<StreamRecordd> stream;
  std::vector<LabelRecord> labels;
  std::vector<double> true_ear;  ///< noiseless EAR per frame, dropouts included
};

EyeLandmarksd eye_from_openness(double openness, double width, double slope);

/// Timestamp of frame `index`; the generator and label boundaries share it.
double frame_time(std::uint64_t index, double fps);

std::uint64_t frame_count(const SynthConfig& config);

SynthOutput generate(const SynthConfig& config);

}  // namespace drowsy
