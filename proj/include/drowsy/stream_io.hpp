#pragma once

// Line-delimited JSON formats.
//
//   frame      {"t":0.0,"face":true,"lm":[[x,y], ... 68 pairs]}
//              {"t":0.0,"face":false}
//   eyes-only  {"t":0.0,"le":[[x,y] x 6],"re":[[x,y] x 6]}
//   label      {"kind":"drowsy","start":1.0,"end":2.5}       half-open [start, end)
//   event      {"kind":"BlinkDetected","t":0.1,"frame":3,"duration":3}
//
// Readers pull one line at a time, so memory is bounded by a single record.
// Blank lines are skipped but still counted for error messages. Doubles are
// written in shortest round-trip form, so parsing a written value restores
// it bit for bit.

#include <drowsy/detector.hpp>
#include <drowsy/landmark.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drowsy {

/// A malformed line. `line()` is 1-based.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t line_;
  std::string reason_;
};

enum class LabelKind : std::uint8_t { Drowsy, Blink };

std::string_view to_string(LabelKind kind) noexcept;

struct LabelRecord {
  LabelKind kind = LabelKind::Drowsy;
  double start = 0.0;
  double end = 0.0;

  double duration() const noexcept { return end - start; }
  bool contains(double t) const noexcept { return t >= start && t < end; }

  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

/// Appends a double in shortest round-trip form, always with a decimal point
/// or exponent so it reads back as a floating value.
void append_double(std::string& out, double value);

std::string format_record(const StreamRecordd& record);
std::string format_label(const LabelRecord& label);
std::string format_event(const DetectionEvent& event);

/// Single-line parsers; `line_no` only feeds error messages.
StreamRecordd parse_record_line(std::string_view line, std::size_t line_no = 1);
LabelRecord parse_label_line(std::string_view line, std::size_t line_no = 1);
DetectionEvent parse_event_line(std::string_view line, std::size_t line_no = 1);

/// Pull parser over a landmark stream. Enforces non-decreasing timestamps.
class StreamReader {
public:
  explicit StreamReader(std::istream& in) : in_(in) {}

  /// Next record, or empty at end of input. Throws ParseError.
  std::optional<StreamRecordd> next();

  std::size_t line_number() const noexcept { return line_no_; }

private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_no_ = 0;
  std::optional<double> last_t_;
};

std::vector<StreamRecordd> parse_stream(std::istream& in);
std::vector<StreamRecordd> parse_stream(std::string_view text);

/// Also rejects overlapping intervals of the same kind.
std::vector<LabelRecord> parse_labels(std::istream& in);
std::vector<LabelRecord> parse_labels(std::string_view text);

std::vector<DetectionEvent> parse_events(std::istream& in);
std::vector<DetectionEvent> parse_events(std::string_view text);

void write_stream(std::ostream& out, const std::vector<StreamRecordd>& records);
void write_labels(std::ostream& out, const std::vector<LabelRecord>& labels);
void write_events(std::ostream& out, const std::vector<DetectionEvent>& events);

std::string write_stream(const std::vector<StreamRecordd>& records);
std::string write_labels(const std::vector<LabelRecord>& labels);
std::string write_events(const std::vector<DetectionEvent>& events);

/// Throws std::invalid_argument naming the pair when two same-kind labels
/// overlap or an interval is empty.
void validate_labels(const std::vector<LabelRecord>& labels);

}  // namespace drowsy
