#include <drowsy/eval.hpp>

#include <drowsy/ear.hpp>

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <thread>

namespace drowsy {

Metric ratio(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) {
    return std::nullopt;
  }
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

Metric f1_from(Metric precision, Metric recall) {
  if (!precision || !recall) {
    return std::nullopt;
  }
  const double sum = *precision + *recall;
  if (sum == 0.0) {
    return 0.0;
  }
  return 2.0 * *precision * *recall / sum;
}

std::vector<FramePair> frame_labels(std::span<const DetectionEvent> events,
                                    std::span<const LabelRecord> labels,
                                    std::span<const double> timestamps,
                                    FrameAttribution attribution) {
  const std::size_t n = timestamps.size();
  std::vector<FramePair> pairs(n);

  std::size_t floor = 0;
  std::size_t open_at = 0;
  bool alert_open = false;
  auto mark = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = std::min(from, n); i < std::min(to, n); ++i) {
      pairs[i].predicted = true;
    }
  };
  for (const auto& e : events) {
    const auto frame = static_cast<std::size_t>(e.frame_index);
    if (e.kind == EventKind::DrowsyOnset && !alert_open) {
      const std::size_t back = std::min<std::size_t>(attribution.backdate, frame);
      open_at = std::max(floor, frame - back);
      alert_open = true;
    } else if (e.kind == EventKind::AlertCleared && alert_open) {
      mark(open_at, frame);
      floor = frame;
      alert_open = false;
    }
  }
  if (alert_open) {
    mark(open_at, n);
  }

  for (const auto& label : labels) {
    if (label.kind != LabelKind::Drowsy) {
      continue;
    }
    const auto first = std::lower_bound(timestamps.begin(), timestamps.end(), label.start);
    const auto last = std::lower_bound(first, timestamps.end(), label.end);
    for (auto it = first; it != last; ++it) {
      pairs[static_cast<std::size_t>(it - timestamps.begin())].actual = true;
    }
  }
  return pairs;
}

ConfusionCounts count_frames(std::span<const FramePair> pairs) {
  ConfusionCounts c;
  for (const auto& p : pairs) {
    if (p.predicted && p.actual) {
      ++c.tp;
    } else if (p.predicted) {
      ++c.fp;
    } else if (p.actual) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

EventCounts match_events(std::span<const double> detection_times,
                         std::span<const LabelRecord> labels, double match_window) {
  std::vector<double> times(detection_times.begin(), detection_times.end());
  std::stable_sort(times.begin(), times.end());
  std::vector<LabelRecord> sorted(labels.begin(), labels.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabelRecord& a, const LabelRecord& b) { return a.start < b.start; });
  std::vector<bool> used(sorted.size(), false);

  EventCounts counts;
  for (const double t : times) {
    bool matched = false;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (!used[i] && t >= sorted[i].start - match_window && t <= sorted[i].end) {
        used[i] = true;
        matched = true;
        break;
      }
    }
    if (matched) {
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = static_cast<std::uint64_t>(std::count(used.begin(), used.end(), false));
  return counts;
}

namespace {

void fill_event_metrics(const EventCounts& c, Metric& precision, Metric& recall, Metric& f1) {
  precision = ratio(c.tp, c.tp + c.fp);
  recall = ratio(c.tp, c.tp + c.fn);
  f1 = f1_from(precision, recall);
}

std::vector<double> times_of(std::span<const DetectionEvent> events, EventKind kind) {
  std::vector<double> out;
  for (const auto& e : events) {
    if (e.kind == kind) {
      out.push_back(e.t);
    }
  }
  return out;
}

std::vector<LabelRecord> labels_of(std::span<const LabelRecord> labels, LabelKind kind) {
  std::vector<LabelRecord> out;
  std::copy_if(labels.begin(), labels.end(), std::back_inserter(out),
               [kind](const LabelRecord& l) { return l.kind == kind; });
  return out;
}

}  // namespace

EvalReport score(std::span<const FramePair> pairs, std::span<const DetectionEvent> events,
                 std::span<const LabelRecord> labels, double match_window) {
  EvalReport r;
  const auto& c = r.frames = count_frames(pairs);
  r.accuracy = ratio(c.tp + c.tn, c.total());
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = f1_from(r.precision, r.recall);
  r.fpr = ratio(c.fp, c.fp + c.tn);
  r.fnr = ratio(c.fn, c.fn + c.tp);

  r.events = match_events(times_of(events, EventKind::DrowsyOnset),
                          labels_of(labels, LabelKind::Drowsy), match_window);
  fill_event_metrics(r.events, r.event_precision, r.event_recall, r.event_f1);

  r.blinks = match_events(times_of(events, EventKind::BlinkDetected),
                          labels_of(labels, LabelKind::Blink), match_window);
  fill_event_metrics(r.blinks, r.blink_precision, r.blink_recall, r.blink_f1);
  return r;
}

EvalReport evaluate_events(std::span<const DetectionEvent> events,
                           std::span<const LabelRecord> labels, std::span<const double> timestamps,
                           const DetectorConfig& config, double match_window) {
  const auto pairs =
      frame_labels(events, labels, timestamps, FrameAttribution::from_closure_start(config));
  return score(pairs, events, labels, match_window);
}

EvalReport evaluate(std::span<const StreamRecordd> stream, std::span<const LabelRecord> labels,
                    const DetectorConfig& config, double match_window) {
  const auto run = run_stream(stream, config);
  std::vector<double> timestamps;
  timestamps.reserve(stream.size());
  for (const auto& r : stream) {
    timestamps.push_back(r.t);
  }
  return evaluate_events(run.events, labels, timestamps, config, match_window);
}

SweepGrid SweepGrid::defaults() {
  SweepGrid grid;
  for (int i = 15; i <= 35; ++i) {
    grid.thresholds.push_back(i / 100.0);
  }
  for (std::uint32_t n = 5; n <= 40; ++n) {
    grid.frame_checks.push_back(n);
  }
  return grid;
}

namespace {

// Undefined sorts below every defined value.
bool better(const EvalReport& a, const EvalReport& b) {
  auto key = [](Metric m) { return m ? *m : -1.0; };
  if (key(a.event_f1) != key(b.event_f1)) {
    return key(a.event_f1) > key(b.event_f1);
  }
  return key(a.f1) > key(b.f1);
}

bool tied(const EvalReport& a, const EvalReport& b) { return !better(a, b) && !better(b, a); }

}  // namespace

std::vector<const SweepCell*> SweepResult::optimal_region() const {
  std::vector<const SweepCell*> region;
  if (cells.empty()) {
    return region;
  }
  for (const auto& cell : cells) {
    if (tied(cell.report, best_cell().report)) {
      region.push_back(&cell);
    }
  }
  return region;
}

SweepResult sweep(std::span<const StreamRecordd> stream, std::span<const LabelRecord> labels,
                  const SweepGrid& grid, const SweepOptions& options) {
  if (grid.thresholds.empty() || grid.frame_checks.empty()) {
    throw std::invalid_argument("sweep grid must be non-empty");
  }

  // EAR and timestamps do not depend on the cell, so compute them once.
  std::vector<EarObservation> ears;
  std::vector<double> timestamps;
  ears.reserve(stream.size());
  timestamps.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    try {
      ears.push_back(record_ear(stream[i]));
    } catch (const std::exception& e) {
      throw StreamError(e.what(), i);
    }
    timestamps.push_back(stream[i].t);
  }

  SweepResult result;
  result.cells.resize(grid.thresholds.size() * grid.frame_checks.size());
  for (std::size_t i = 0; i < grid.thresholds.size(); ++i) {
    for (std::size_t j = 0; j < grid.frame_checks.size(); ++j) {
      auto& cell = result.cells[i * grid.frame_checks.size() + j];
      cell.threshold = grid.thresholds[i];
      cell.frame_check = grid.frame_checks[j];
      DetectorConfig{cell.threshold, cell.frame_check, options.missing_face}.validate();
    }
  }

  auto run_cell = [&](SweepCell& cell) {
    const DetectorConfig config{cell.threshold, cell.frame_check, options.missing_face};
    const auto run = run_ear_sequence(ears, timestamps, config);
    cell.report = evaluate_events(run.events, labels, timestamps, config, options.match_window);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(
                                            options.threads,
                                            static_cast<unsigned>(result.cells.size())));
  if (threads == 1) {
    for (auto& cell : result.cells) {
      run_cell(cell);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < result.cells.size(); k = next++) {
          run_cell(result.cells[k]);
        }
      });
    }
  }

  for (std::size_t k = 1; k < result.cells.size(); ++k) {
    if (better(result.cells[k].report, result.cells[result.best].report)) {
      result.best = k;
    }
  }
  return result;
}

std::string format_metric(Metric m) {
  if (!m) {
    return "NA";
  }
  std::string out;
  append_double(out, *m);
  return out;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "tau,N,accuracy,precision,recall,f1,fpr,fnr,event_f1\n";
  for (const auto& cell : result.cells) {
    const auto& r = cell.report;
    std::string tau;
    append_double(tau, cell.threshold);
    out << tau << ',' << cell.frame_check << ',' << format_metric(r.accuracy) << ','
        << format_metric(r.precision) << ',' << format_metric(r.recall) << ','
        << format_metric(r.f1) << ',' << format_metric(r.fpr) << ',' << format_metric(r.fnr)
        << ',' << format_metric(r.event_f1) << '\n';
  }
}

namespace {

std::string percent(Metric m) {
  if (!m) {
    return "undefined";
  }
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << *m * 100.0 << '%';
  return s.str();
}

}  // namespace

void write_report_table(std::ostream& out, const EvalReport& r) {
  const auto& c = r.frames;
  out << "frames      tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn << " fn=" << c.fn << '\n';
  out << std::left;
  auto row = [&](const char* name, Metric m, const std::string& denom) {
    out << "  " << std::setw(20) << name << std::setw(12) << percent(m) << format_metric(m)
        << "  (n=" << denom << ")\n";
  };
  row("accuracy", r.accuracy, std::to_string(c.total()));
  row("precision", r.precision, std::to_string(c.tp + c.fp));
  row("recall", r.recall, std::to_string(c.tp + c.fn));
  row("f1", r.f1, "-");
  row("false pos. rate", r.fpr, std::to_string(c.fp + c.tn));
  row("false neg. rate", r.fnr, std::to_string(c.fn + c.tp));
  out << "drowsy episodes  tp=" << r.events.tp << " fp=" << r.events.fp << " fn=" << r.events.fn
      << '\n';
  row("event precision", r.event_precision, std::to_string(r.events.tp + r.events.fp));
  row("event recall", r.event_recall, std::to_string(r.events.tp + r.events.fn));
  row("event f1", r.event_f1, "-");
  out << "blinks      tp=" << r.blinks.tp << " fp=" << r.blinks.fp << " fn=" << r.blinks.fn << '\n';
  row("blink precision", r.blink_precision, std::to_string(r.blinks.tp + r.blinks.fp));
  row("blink recall", r.blink_recall, std::to_string(r.blinks.tp + r.blinks.fn));
  row("blink f1", r.blink_f1, "-");
  out << std::right;
}

void write_report_csv(std::ostream& out, const EvalReport& r, const DetectorConfig& config) {
  SweepResult single;
  single.cells.push_back({config.ear_threshold, config.frame_check, r});
  write_sweep_csv(out, single);
}

void write_sweep_table(std::ostream& out, const SweepResult& result) {
  const auto& best = result.best_cell();
  const auto region = result.optimal_region();
  out << "cells evaluated   " << result.cells.size() << '\n';
  out << "best (tau, N)     (" << best.threshold << ", " << best.frame_check << ")\n";
  out << "best event f1     " << format_metric(best.report.event_f1) << '\n';
  out << "best frame f1     " << format_metric(best.report.f1) << '\n';
  out << "optimal region    " << region.size() << " cells\n";
  double tau_lo = best.threshold, tau_hi = best.threshold;
  std::uint32_t n_lo = best.frame_check, n_hi = best.frame_check;
  for (const auto* cell : region) {
    tau_lo = std::min(tau_lo, cell->threshold);
    tau_hi = std::max(tau_hi, cell->threshold);
    n_lo = std::min(n_lo, cell->frame_check);
    n_hi = std::max(n_hi, cell->frame_check);
  }
  out << "  tau in [" << tau_lo << ", " << tau_hi << "], N in [" << n_lo << ", " << n_hi
      << "]\n";
}

}  // namespace drowsy
