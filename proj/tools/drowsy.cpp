// drowsy: command-line front end for the detection engine.
//
//   drowsy detect --input frames.jsonl            events as JSON lines
//   drowsy synth  --seed 7 --output s.jsonl       synthetic stream + labels
//   drowsy eval   --input s.jsonl --labels l.jsonl
//   drowsy sweep  --input s.jsonl --labels l.jsonl > grid.csv
//   drowsy bench
//
// '-' means stdin/stdout wherever a path is accepted. Data goes to stdout,
// diagnostics to stderr. Exit codes: 0 ok, 1 usage, 2 data error.

#include <drowsy/bench.hpp>
#include <drowsy/detector.hpp>
#include <drowsy/ear.hpp>
#include <drowsy/eval.hpp>
#include <drowsy/stream_io.hpp>
#include <drowsy/synth.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DetectorFlags {
  double threshold = 0.25;
  std::uint32_t frames = 20;
  drowsy::MissingFacePolicy missing_face = drowsy::MissingFacePolicy::Reset;

  drowsy::DetectorConfig config() const {
    drowsy::DetectorConfig c{threshold, frames, missing_face};
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

void add_detector_flags(CLI::App* cmd, DetectorFlags& flags) {
  const std::map<std::string, drowsy::MissingFacePolicy> policies{
      {"reset", drowsy::MissingFacePolicy::Reset}, {"hold", drowsy::MissingFacePolicy::Hold}};
  cmd->add_option("--threshold", flags.threshold, "EAR below this counts as closed")
      ->capture_default_str();
  cmd->add_option("--frames", flags.frames,
                  "consecutive closed frames before an alert (20 frames ~ 0.67 s at 30 FPS)")
      ->capture_default_str();
  cmd->add_option("--missing-face", flags.missing_face, "no-face frames: reset or hold")
      ->transform(CLI::CheckedTransformer(policies, CLI::ignore_case))
      ->default_str("reset");
}

// Holds either a file stream or a borrowed standard stream.
class Input {
public:
  explicit Input(const std::string& path) {
    if (path == "-") {
      in_ = &std::cin;
    } else {
      file_ = std::make_unique<std::ifstream>(path);
      if (!*file_) {
        throw std::runtime_error("cannot open " + path);
      }
      in_ = file_.get();
    }
  }
  std::istream& get() { return *in_; }

private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* in_ = nullptr;
};

class Output {
public:
  explicit Output(const std::string& path) {
    if (path == "-") {
      out_ = &std::cout;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) {
        throw std::runtime_error("cannot write " + path);
      }
      out_ = file_.get();
    }
  }
  std::ostream& get() { return *out_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

std::vector<drowsy::StreamRecordd> read_stream(const std::string& path) {
  Input in(path);
  return drowsy::parse_stream(in.get());
}

std::vector<drowsy::LabelRecord> read_labels(const std::string& path) {
  Input in(path);
  return drowsy::parse_labels(in.get());
}

drowsy::Closure parse_closure(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw UsageError("closure must be START_SECONDS:FRAMES, got '" + spec + "'");
  }
  try {
    drowsy::Closure c;
    c.start = std::stod(spec.substr(0, colon));
    const long frames = std::stol(spec.substr(colon + 1));
    if (frames < 1) {
      throw UsageError("closure frame count must be positive in '" + spec + "'");
    }
    c.frames = static_cast<std::uint32_t>(frames);
    return c;
  } catch (const std::logic_error&) {
    throw UsageError("closure must be START_SECONDS:FRAMES, got '" + spec + "'");
  }
}

std::string default_labels_path(const std::string& output) {
  const std::string ext = ".jsonl";
  if (output.size() > ext.size() && output.compare(output.size() - ext.size(), ext.size(), ext) == 0) {
    return output.substr(0, output.size() - ext.size()) + ".labels.jsonl";
  }
  return output + ".labels.jsonl";
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
  DetectorFlags detector;
  std::string input = "-";
  std::string output = "-";
  std::string ear_trace;
  std::string format = "jsonl";
};

void write_table_event(std::ostream& out, const drowsy::DetectionEvent& e) {
  out << "frame " << e.frame_index << "  t=" << e.t << "  " << drowsy::to_string(e.kind);
  if (e.kind == drowsy::EventKind::BlinkDetected) {
    out << " (" << e.duration_frames << " frames)";
  }
  if (e.kind == drowsy::EventKind::DrowsyOnset) {
    out << "  ** DROWSINESS ALERT **";
  }
  out << '\n';
}

int run_detect(const DetectArgs& args) {
  const auto config = args.detector.config();
  Input in(args.input);
  Output out(args.output);
  std::optional<Output> trace;
  if (!args.ear_trace.empty()) {
    trace.emplace(args.ear_trace);
  }

  drowsy::StreamReader reader(in.get());
  drowsy::Detector detector(config);
  std::vector<drowsy::DetectionEvent> events;
  std::uint64_t index = 0;
  while (auto record = reader.next()) {
    drowsy::EarObservation ear;
    try {
      ear = drowsy::record_ear(*record);
    } catch (const std::exception& e) {
      throw drowsy::ParseError(reader.line_number(), e.what());
    }
    if (trace) {
      std::string line = "{\"frame\":" + std::to_string(index) + ",\"t\":";
      drowsy::append_double(line, record->t);
      line += ",\"ear\":";
      if (ear) {
        drowsy::append_double(line, *ear);
      } else {
        line += "null";
      }
      trace->get() << line << "}\n";
    }
    events.clear();
    detector.process(ear, record->t, index++, events);
    for (const auto& e : events) {
      if (args.format == "table") {
        write_table_event(out.get(), e);
      } else {
        out.get() << drowsy::format_event(e) << '\n';
      }
      out.get().flush();
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  drowsy::SynthConfig config;
  std::string output = "-";
  std::string labels;
  std::vector<std::string> episodes;
  std::vector<std::string> blinks;
};

int run_synth(SynthArgs args) {
  for (const auto& e : args.episodes) {
    args.config.drowsy_episodes.push_back(parse_closure(e));
  }
  for (const auto& b : args.blinks) {
    args.config.scripted_blinks.push_back(parse_closure(b));
  }
  try {
    args.config.validate();
  } catch (const drowsy::SynthConfigError& e) {
    throw UsageError(e.what());
  }
  const auto generated = drowsy::generate(args.config);

  std::string labels_path = args.labels;
  if (labels_path.empty() && args.output != "-") {
    labels_path = default_labels_path(args.output);
  }
  {
    Output out(args.output);
    drowsy::write_stream(out.get(), generated.stream);
    out.get().flush();
  }
  if (!labels_path.empty()) {
    Output labels(labels_path);
    drowsy::write_labels(labels.get(), generated.labels);
  } else {
    std::cerr << "drowsy synth: no --labels path given, ground truth not written\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  DetectorFlags detector;
  std::string input;
  std::string events;
  std::string labels;
  std::string output = "-";
  std::string format = "table";
  double window = drowsy::kDefaultMatchWindow;
  double fps = 30.0;
  std::uint64_t total_frames = 0;
};

int run_eval(const EvalArgs& args) {
  const auto config = args.detector.config();
  if (args.input.empty() && (args.events.empty() || args.total_frames == 0)) {
    throw UsageError("eval needs --input, or --events with --total-frames");
  }
  const auto labels = read_labels(args.labels);

  drowsy::EvalReport report;
  if (args.events.empty()) {
    report = drowsy::evaluate(read_stream(args.input), labels, config, args.window);
  } else {
    Input ev(args.events);
    const auto events = drowsy::parse_events(ev.get());
    std::vector<double> timestamps;
    if (!args.input.empty()) {
      for (const auto& r : read_stream(args.input)) {
        timestamps.push_back(r.t);
      }
    } else {
      for (std::uint64_t i = 0; i < args.total_frames; ++i) {
        timestamps.push_back(drowsy::frame_time(i, args.fps));
      }
    }
    report = drowsy::evaluate_events(events, labels, timestamps, config, args.window);
  }

  Output out(args.output);
  if (args.format == "csv") {
    drowsy::write_report_csv(out.get(), report, config);
  } else {
    out.get() << "threshold " << config.ear_threshold << ", frame check " << config.frame_check
              << '\n';
    drowsy::write_report_table(out.get(), report);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string input;
  std::string labels;
  std::string output = "-";
  std::string format = "csv";
  drowsy::MissingFacePolicy missing_face = drowsy::MissingFacePolicy::Reset;
  double tau_min = 0.15, tau_max = 0.35, tau_step = 0.01;
  std::uint32_t n_min = 5, n_max = 40;
  double window = drowsy::kDefaultMatchWindow;
  unsigned threads = 1;
};

int run_sweep(const SweepArgs& args) {
  if (!(args.tau_step > 0.0) || args.tau_min > args.tau_max || args.n_min < 1 ||
      args.n_min > args.n_max) {
    throw UsageError("sweep ranges must be non-empty with a positive step");
  }
  drowsy::SweepGrid grid;
  const auto steps = static_cast<long>(std::floor((args.tau_max - args.tau_min) / args.tau_step + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    // Rounded so that e.g. 0.15 + 10 * 0.01 lands exactly on 0.25.
    grid.thresholds.push_back(std::round((args.tau_min + i * args.tau_step) * 1e9) / 1e9);
  }
  for (std::uint32_t n = args.n_min; n <= args.n_max; ++n) {
    grid.frame_checks.push_back(n);
  }
  for (const double tau : grid.thresholds) {
    drowsy::DetectorConfig{tau, args.n_min, args.missing_face}.validate();
  }

  const auto stream = read_stream(args.input);
  const auto labels = read_labels(args.labels);
  drowsy::SweepOptions options;
  options.missing_face = args.missing_face;
  options.match_window = args.window;
  options.threads = args.threads;
  const auto result = drowsy::sweep(stream, labels, grid, options);

  Output out(args.output);
  if (args.format == "table") {
    drowsy::write_sweep_table(out.get(), result);
  } else {
    drowsy::write_sweep_csv(out.get(), result);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  DetectorFlags detector;
  std::string input;
  std::string output = "-";
  std::string format = "table";
  std::uint64_t total_frames = 100'000;
  unsigned repetitions = 3;
  unsigned parallel = 0;
  std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& args) {
  const auto config = args.detector.config();
  if (args.repetitions == 0) {
    throw UsageError("--repetitions must be at least 1");
  }
  std::vector<drowsy::StreamRecordd> stream;
  if (!args.input.empty()) {
    stream = read_stream(args.input);
  } else {
    drowsy::SynthConfig synth;
    synth.seed = args.seed;
    synth.duration = static_cast<double>(args.total_frames) / synth.fps;
    synth.noise_sigma = 0.5;
    synth.dropout_prob = 0.01;
    for (double t = 10.0; t + 2.0 < synth.duration; t += 60.0) {
      synth.drowsy_episodes.push_back({t, 45});
    }
    stream = drowsy::generate(synth).stream;
  }
  drowsy::BenchOptions options;
  options.repetitions = args.repetitions;
  options.parallel_streams = args.parallel;
  const auto report = drowsy::run_bench(stream, config, options);

  Output out(args.output);
  if (args.format == "csv") {
    drowsy::write_bench_csv(out.get(), report);
  } else {
    drowsy::write_bench_report(out.get(), report);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eye-aspect-ratio drowsiness detection engine"};
  app.require_subcommand(1);

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "run the detector over a landmark stream");
  add_detector_flags(detect_cmd, detect.detector);
  detect_cmd->add_option("--input", detect.input, "landmark stream, '-' for stdin")->capture_default_str();
  detect_cmd->add_option("--output", detect.output, "event output, '-' for stdout")->capture_default_str();
  detect_cmd->add_option("--ear-trace", detect.ear_trace, "also write per-frame EAR lines here");
  detect_cmd->add_option("--format", detect.format)
      ->check(CLI::IsMember({"jsonl", "table"}))
      ->capture_default_str();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic stream and labels");
  synth_cmd->add_option("--output", synth.output, "stream output, '-' for stdout")->capture_default_str();
  synth_cmd->add_option("--labels", synth.labels,
                        "label output (default: derived from --output)");
  synth_cmd->add_option("--seed", synth.config.seed)->capture_default_str();
  synth_cmd->add_option("--fps", synth.config.fps)->capture_default_str();
  synth_cmd->add_option("--duration", synth.config.duration, "seconds")->capture_default_str();
  synth_cmd->add_option("--eye-width", synth.config.eye_width, "px")->capture_default_str();
  synth_cmd->add_option("--slope", synth.config.slope, "EAR of a fully open eye")->capture_default_str();
  synth_cmd->add_option("--closed-level", synth.config.closed_level, "openness of a closed eye")
      ->capture_default_str();
  synth_cmd->add_option("--blink-rate", synth.config.blink_rate, "blinks per minute")
      ->capture_default_str();
  synth_cmd->add_option("--blink-min", synth.config.blink_min_frames)->capture_default_str();
  synth_cmd->add_option("--blink-max", synth.config.blink_max_frames)->capture_default_str();
  synth_cmd->add_option("--episode", synth.episodes, "drowsy closure START_SECONDS:FRAMES");
  synth_cmd->add_option("--blink", synth.blinks, "scripted blink START_SECONDS:FRAMES");
  synth_cmd->add_option("--noise", synth.config.noise_sigma, "landmark jitter sigma, px")
      ->capture_default_str();
  synth_cmd->add_option("--dropout", synth.config.dropout_prob, "per-frame no-face probability")
      ->capture_default_str();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score detections against ground-truth labels");
  add_detector_flags(eval_cmd, eval.detector);
  eval_cmd->add_option("--input", eval.input, "landmark stream (detection runs internally)");
  eval_cmd->add_option("--events", eval.events, "precomputed events instead of running detection");
  eval_cmd->add_option("--labels", eval.labels, "ground-truth labels")->required();
  eval_cmd->add_option("--output", eval.output)->capture_default_str();
  eval_cmd->add_option("--format", eval.format)
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  eval_cmd->add_option("--window", eval.window, "onset match window before a label, s")
      ->capture_default_str();
  eval_cmd->add_option("--fps", eval.fps, "frame rate when no --input is given")->capture_default_str();
  eval_cmd->add_option("--total-frames", eval.total_frames, "frame count when no --input is given");

  SweepArgs sweep;
  const std::map<std::string, drowsy::MissingFacePolicy> policies{
      {"reset", drowsy::MissingFacePolicy::Reset}, {"hold", drowsy::MissingFacePolicy::Hold}};
  auto* sweep_cmd = app.add_subcommand("sweep", "grid-search threshold and frame check");
  sweep_cmd->add_option("--input", sweep.input)->required();
  sweep_cmd->add_option("--labels", sweep.labels)->required();
  sweep_cmd->add_option("--output", sweep.output)->capture_default_str();
  sweep_cmd->add_option("--format", sweep.format)
      ->check(CLI::IsMember({"csv", "table"}))
      ->capture_default_str();
  sweep_cmd->add_option("--missing-face", sweep.missing_face)
      ->transform(CLI::CheckedTransformer(policies, CLI::ignore_case))
      ->default_str("reset");
  sweep_cmd->add_option("--tau-min", sweep.tau_min)->capture_default_str();
  sweep_cmd->add_option("--tau-max", sweep.tau_max)->capture_default_str();
  sweep_cmd->add_option("--tau-step", sweep.tau_step)->capture_default_str();
  sweep_cmd->add_option("--n-min", sweep.n_min)->capture_default_str();
  sweep_cmd->add_option("--n-max", sweep.n_max)->capture_default_str();
  sweep_cmd->add_option("--window", sweep.window)->capture_default_str();
  sweep_cmd->add_option("--threads", sweep.threads)->check(CLI::PositiveNumber)->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "measure per-frame latency and throughput");
  add_detector_flags(bench_cmd, bench.detector);
  bench_cmd->add_option("--input", bench.input, "stream to replay (default: synthesized)");
  bench_cmd->add_option("--output", bench.output)->capture_default_str();
  bench_cmd->add_option("--format", bench.format)
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  bench_cmd->add_option("--total-frames", bench.total_frames, "synthesized stream length")
      ->capture_default_str();
  bench_cmd->add_option("--repetitions", bench.repetitions)->capture_default_str();
  bench_cmd->add_option("--parallel", bench.parallel, "independent streams run concurrently")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  std::ios::sync_with_stdio(false);
  try {
    if (*detect_cmd) return run_detect(detect);
    if (*synth_cmd) return run_synth(synth);
    if (*eval_cmd) return run_eval(eval);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*bench_cmd) return run_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "drowsy: " << e.what() << '\n';
    return kExitUsage;
  } catch (const drowsy::BenchError& e) {
    std::cerr << "drowsy: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "drowsy: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "drowsy: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
