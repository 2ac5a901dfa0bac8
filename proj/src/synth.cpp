#include <drowsy/synth.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace drowsy {

namespace {

// Eye placements in a nominal 640x480 frame, subject's right eye on the
// image left.
const Point2d kRightEyeOrigin{250.0, 200.0};
const Point2d kLeftEyeOrigin{350.0, 200.0};

enum class Stream : std::uint64_t { Schedule = 1, Noise = 2, Dropout = 3 };

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

class Schedule {
public:
  explicit Schedule(std::uint64_t frames) : closed_(frames, false) {}

  // A closure needs one open frame on either side so that adjacent closures
  // never merge into a single run.
  bool fits(std::uint64_t start, std::uint64_t length, bool need_reopen) const {
    const std::uint64_t n = closed_.size();
    if (length == 0 || start + length > n || (need_reopen && start + length >= n)) {
      return false;
    }
    const std::uint64_t lo = start == 0 ? 0 : start - 1;
    const std::uint64_t hi = std::min(n, start + length + 1);
    for (std::uint64_t i = lo; i < hi; ++i) {
      if (closed_[i]) {
        return false;
      }
    }
    return true;
  }

  void close(std::uint64_t start, std::uint64_t length) {
    std::fill(closed_.begin() + static_cast<std::ptrdiff_t>(start),
              closed_.begin() + static_cast<std::ptrdiff_t>(start + length), true);
  }

  bool closed(std::uint64_t i) const { return closed_[i]; }

private:
  std::vector<bool> closed_;
};

std::uint64_t start_frame(double start, double fps) {
  return static_cast<std::uint64_t>(std::llround(start * fps));
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw SynthConfigError(what); };
  if (!(std::isfinite(fps) && fps > 0.0)) fail("fps must be positive");
  if (!(std::isfinite(duration) && duration >= 0.0)) fail("duration must be non-negative");
  if (!(std::isfinite(eye_width) && eye_width > 0.0)) fail("eye width must be positive");
  if (!(std::isfinite(slope) && slope > 0.0)) fail("slope must be positive");
  if (!(closed_level >= 0.0 && closed_level <= open_level && open_level <= 1.0)) {
    fail("openness levels must satisfy 0 <= closed <= open <= 1");
  }
  if (!(std::isfinite(blink_rate) && blink_rate >= 0.0)) fail("blink rate must be non-negative");
  if (blink_min_frames < 1 || blink_min_frames > blink_max_frames) {
    fail("blink duration range must satisfy 1 <= min <= max");
  }
  if (!(std::isfinite(noise_sigma) && noise_sigma >= 0.0)) fail("noise sigma must be non-negative");
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) fail("dropout probability must lie in [0, 1]");
  for (const auto* list : {&drowsy_episodes, &scripted_blinks}) {
    for (const auto& c : *list) {
      if (!(std::isfinite(c.start) && c.start >= 0.0) || c.frames < 1) {
        fail("closures need a non-negative start and at least one frame");
      }
    }
  }
}

EyeLandmarksd eye_from_openness(double openness, double width, double slope) {
  const double half_height = openness * slope * width / 2.0;
  EyeLandmarksd eye;
  eye.col(0) << 0.0, 0.0;
  eye.col(1) << width / 3.0, half_height;
  eye.col(2) << 2.0 * width / 3.0, half_height;
  eye.col(3) << width, 0.0;
  eye.col(4) << 2.0 * width / 3.0, -half_height;
  eye.col(5) << width / 3.0, -half_height;
  return eye;
}

double frame_time(std::uint64_t index, double fps) { return static_cast<double>(index) / fps; }

std::uint64_t frame_count(const SynthConfig& config) {
  return static_cast<std::uint64_t>(std::llround(config.duration * config.fps));
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  const std::uint64_t n = frame_count(config);
  Schedule schedule(n);
  SynthOutput out;

  auto place = [&](const Closure& c, LabelKind kind) {
    const std::uint64_t s = start_frame(c.start, config.fps);
    if (!schedule.fits(s, c.frames, /*need_reopen=*/false)) {
      throw SynthConfigError(std::string(to_string(kind)) + " closure at " +
                             std::to_string(c.start) + " s collides or exceeds the stream");
    }
    schedule.close(s, c.frames);
    out.labels.push_back({kind, frame_time(s, config.fps), frame_time(s + c.frames, config.fps)});
  };
  for (const auto& e : config.drowsy_episodes) {
    place(e, LabelKind::Drowsy);
  }
  for (const auto& b : config.scripted_blinks) {
    place(b, LabelKind::Blink);
  }

  // Every candidate consumes the same draws whether or not it is placed, so
  // the blink sequence depends only on the seed and the rate.
  auto rng = make_engine(config.seed, Stream::Schedule);
  if (config.blink_rate > 0.0 && n > 0) {
    std::exponential_distribution<double> gap(config.blink_rate / 60.0);
    std::uniform_int_distribution<std::uint32_t> length(config.blink_min_frames,
                                                        config.blink_max_frames);
    double t = 0.0;
    for (;;) {
      t += gap(rng);
      const std::uint32_t frames = length(rng);
      if (t >= config.duration) {
        break;
      }
      const std::uint64_t s = start_frame(t, config.fps);
      if (schedule.fits(s, frames, /*need_reopen=*/true)) {
        schedule.close(s, frames);
        out.labels.push_back(
            {LabelKind::Blink, frame_time(s, config.fps), frame_time(s + frames, config.fps)});
      }
    }
  }
  std::stable_sort(out.labels.begin(), out.labels.end(),
                   [](const LabelRecord& a, const LabelRecord& b) { return a.start < b.start; });

  auto noise_rng = make_engine(config.seed, Stream::Noise);
  auto dropout_rng = make_engine(config.seed, Stream::Dropout);
  std::normal_distribution<double> jitter(0.0, config.noise_sigma);
  std::bernoulli_distribution dropout(config.dropout_prob);

  const EyeLandmarksd open_eye =
      eye_from_openness(config.open_level, config.eye_width, config.slope);
  const EyeLandmarksd closed_eye =
      eye_from_openness(config.closed_level, config.eye_width, config.slope);

  out.stream.reserve(n);
  out.true_ear.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const bool closed = schedule.closed(i);
    out.true_ear.push_back((closed ? config.closed_level : config.open_level) * config.slope);

    StreamRecordd record;
    record.t = frame_time(i, config.fps);
    if (config.dropout_prob > 0.0 && dropout(dropout_rng)) {
      record.payload = NoFace{};
      out.stream.push_back(std::move(record));
      continue;
    }
    const EyeLandmarksd& eye = closed ? closed_eye : open_eye;
    EyePaird eyes;
    eyes.right = eye.colwise() + kRightEyeOrigin;
    eyes.left = eye.colwise() + kLeftEyeOrigin;
    if (config.noise_sigma > 0.0) {
      for (Eigen::Index k = 0; k < eyes.left.size(); ++k) {
        eyes.right(k) += jitter(noise_rng);
        eyes.left(k) += jitter(noise_rng);
      }
    }
    record.payload = eyes;
    out.stream.push_back(std::move(record));
  }
  return out;
}

}  // namespace drowsy
