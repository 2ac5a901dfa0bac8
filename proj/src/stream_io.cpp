#include <drowsy/stream_io.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace drowsy {

using nlohmann::json;

namespace {

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

json parse_object(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::exception& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ParseError(line_no, "record is not a JSON object");
  }
  return j;
}

double finite_number(const json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(line_no, std::string("missing \"") + key + "\"");
  }
  if (!it->is_number()) {
    throw ParseError(line_no, std::string("\"") + key + "\" is not a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw ParseError(line_no, std::string("\"") + key + "\" is not finite");
  }
  return v;
}

// Reads [[x,y], ...] with exactly `expected` pairs into a 2 x expected matrix.
template <int Cols>
Eigen::Matrix<double, 2, Cols> point_array(const json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(line_no, std::string("missing \"") + key + "\"");
  }
  if (!it->is_array()) {
    throw ParseError(line_no, std::string("\"") + key + "\" is not an array");
  }
  if (it->size() != Cols) {
    throw ParseError(line_no, std::string("\"") + key + "\" expects " + std::to_string(Cols) +
                                  " points, got " + std::to_string(it->size()));
  }
  Eigen::Matrix<double, 2, Cols> pts;
  for (int i = 0; i < Cols; ++i) {
    const json& pair = (*it)[static_cast<std::size_t>(i)];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw ParseError(line_no, std::string("\"") + key + "\" point " + std::to_string(i) +
                                    " is not an [x,y] pair");
    }
    pts(0, i) = pair[0].get<double>();
    pts(1, i) = pair[1].get<double>();
    if (!std::isfinite(pts(0, i)) || !std::isfinite(pts(1, i))) {
      throw ParseError(line_no, std::string("\"") + key + "\" point " + std::to_string(i) +
                                    " is not finite");
    }
  }
  return pts;
}

template <typename Derived>
void append_points(std::string& out, const Eigen::MatrixBase<Derived>& pts) {
  out += '[';
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += '[';
    append_double(out, pts(0, i));
    out += ',';
    append_double(out, pts(1, i));
    out += ']';
  }
  out += ']';
}

void append_uint(std::string& out, std::uint64_t value) {
  std::array<char, 24> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), res.ptr);
}

bool next_line(std::istream& in, std::string& buffer) {
  return static_cast<bool>(std::getline(in, buffer));
}

template <typename T, typename ParseLine>
std::vector<T> parse_all(std::istream& in, ParseLine&& parse_line) {
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      continue;
    }
    out.push_back(parse_line(line, line_no));
  }
  return out;
}

}  // namespace

std::string_view to_string(LabelKind kind) noexcept {
  return kind == LabelKind::Drowsy ? "drowsy" : "blink";
}

void append_double(std::string& out, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("cannot serialize a non-finite number");
  }
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  const std::string_view text(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
  out += text;
  if (text.find_first_of(".e") == std::string_view::npos) {
    out += ".0";
  }
}

std::string format_record(const StreamRecordd& record) {
  std::string out;
  out.reserve(128);
  out += "{\"t\":";
  append_double(out, record.t);
  if (const auto* face = std::get_if<FaceLandmarksd>(&record.payload)) {
    out += ",\"face\":true,\"lm\":";
    append_points(out, face->points());
  } else if (const auto* eyes = std::get_if<EyePaird>(&record.payload)) {
    out += ",\"le\":";
    append_points(out, eyes->left);
    out += ",\"re\":";
    append_points(out, eyes->right);
  } else {
    out += ",\"face\":false";
  }
  out += '}';
  return out;
}

std::string format_label(const LabelRecord& label) {
  std::string out = "{\"kind\":\"";
  out += to_string(label.kind);
  out += "\",\"start\":";
  append_double(out, label.start);
  out += ",\"end\":";
  append_double(out, label.end);
  out += '}';
  return out;
}

std::string format_event(const DetectionEvent& event) {
  std::string out = "{\"kind\":\"";
  out += to_string(event.kind);
  out += "\",\"t\":";
  append_double(out, event.t);
  out += ",\"frame\":";
  append_uint(out, event.frame_index);
  if (event.kind == EventKind::BlinkDetected) {
    out += ",\"duration\":";
    append_uint(out, event.duration_frames);
  }
  out += '}';
  return out;
}

StreamRecordd parse_record_line(std::string_view line, std::size_t line_no) {
  const json obj = parse_object(line, line_no);
  StreamRecordd record;
  record.t = finite_number(obj, "t", line_no);

  const bool has_eyes = obj.contains("le") || obj.contains("re");
  const auto face_it = obj.find("face");
  if (has_eyes) {
    if (face_it != obj.end() || obj.contains("lm")) {
      throw ParseError(line_no, "eyes-only record must not carry \"face\" or \"lm\"");
    }
    EyePaird eyes;
    eyes.left = point_array<kEyePointCount>(obj, "le", line_no);
    eyes.right = point_array<kEyePointCount>(obj, "re", line_no);
    record.payload = eyes;
    return record;
  }

  if (face_it == obj.end()) {
    throw ParseError(line_no, "record has neither \"face\" nor \"le\"/\"re\"");
  }
  if (!face_it->is_boolean()) {
    throw ParseError(line_no, "\"face\" is not a boolean");
  }
  if (!face_it->get<bool>()) {
    if (obj.contains("lm")) {
      throw ParseError(line_no, "\"lm\" present on a no-face record");
    }
    record.payload = NoFace{};
    return record;
  }
  record.payload = FaceLandmarksd::from_points(point_array<kFacePointCount>(obj, "lm", line_no));
  return record;
}

LabelRecord parse_label_line(std::string_view line, std::size_t line_no) {
  const json obj = parse_object(line, line_no);
  const auto kind_it = obj.find("kind");
  if (kind_it == obj.end() || !kind_it->is_string()) {
    throw ParseError(line_no, "missing string \"kind\"");
  }
  LabelRecord label;
  const auto kind = kind_it->get<std::string>();
  if (kind == "drowsy") {
    label.kind = LabelKind::Drowsy;
  } else if (kind == "blink") {
    label.kind = LabelKind::Blink;
  } else {
    throw ParseError(line_no, "unknown label kind \"" + kind + "\"");
  }
  label.start = finite_number(obj, "start", line_no);
  label.end = finite_number(obj, "end", line_no);
  if (!(label.start < label.end)) {
    throw ParseError(line_no, "label start must precede end");
  }
  return label;
}

DetectionEvent parse_event_line(std::string_view line, std::size_t line_no) {
  const json obj = parse_object(line, line_no);
  const auto kind_it = obj.find("kind");
  if (kind_it == obj.end() || !kind_it->is_string()) {
    throw ParseError(line_no, "missing string \"kind\"");
  }
  const auto kind = event_kind_from_string(kind_it->get<std::string>());
  if (!kind) {
    throw ParseError(line_no, "unknown event kind \"" + kind_it->get<std::string>() + "\"");
  }
  DetectionEvent event;
  event.kind = *kind;
  event.t = finite_number(obj, "t", line_no);
  const auto frame_it = obj.find("frame");
  if (frame_it == obj.end() || !frame_it->is_number_unsigned()) {
    throw ParseError(line_no, "\"frame\" must be a non-negative integer");
  }
  event.frame_index = frame_it->get<std::uint64_t>();
  const auto dur_it = obj.find("duration");
  if (event.kind == EventKind::BlinkDetected) {
    if (dur_it == obj.end() || !dur_it->is_number_unsigned() ||
        dur_it->get<std::uint64_t>() < 1 ||
        dur_it->get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError(line_no, "BlinkDetected requires a positive integer \"duration\"");
    }
    event.duration_frames = dur_it->get<std::uint32_t>();
  } else if (dur_it != obj.end()) {
    throw ParseError(line_no, "\"duration\" is only valid on BlinkDetected");
  }
  return event;
}

std::optional<StreamRecordd> StreamReader::next() {
  while (next_line(in_, buffer_)) {
    ++line_no_;
    if (is_blank(buffer_)) {
      continue;
    }
    StreamRecordd record;
    try {
      record = parse_record_line(buffer_, line_no_);
    } catch (const LandmarkError& e) {
      throw ParseError(line_no_, e.what());
    }
    if (last_t_ && record.t < *last_t_) {
      throw ParseError(line_no_, "timestamp regression");
    }
    last_t_ = record.t;
    return record;
  }
  return std::nullopt;
}

std::vector<StreamRecordd> parse_stream(std::istream& in) {
  StreamReader reader(in);
  std::vector<StreamRecordd> out;
  while (auto record = reader.next()) {
    out.push_back(std::move(*record));
  }
  return out;
}

std::vector<StreamRecordd> parse_stream(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_stream(in);
}

void validate_labels(const std::vector<LabelRecord>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!(labels[i].start < labels[i].end)) {
      throw std::invalid_argument("label " + std::to_string(i) + " is empty or inverted");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (labels[j].kind == labels[i].kind && labels[j].start < labels[i].end &&
          labels[i].start < labels[j].end) {
        throw std::invalid_argument("label " + std::to_string(i) + " overlaps label " +
                                    std::to_string(j));
      }
    }
  }
}

std::vector<LabelRecord> parse_labels(std::istream& in) {
  std::vector<LabelRecord> out;
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      continue;
    }
    out.push_back(parse_label_line(line, line_no));
    line_of.push_back(line_no);
  }
  // Sorting by start lets each label be checked against its same-kind predecessor only.
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out[a].start < out[b].start; });
  std::array<std::optional<std::size_t>, 2> previous;
  for (const std::size_t idx : order) {
    auto& prev = previous[static_cast<std::size_t>(out[idx].kind)];
    if (prev && out[*prev].end > out[idx].start) {
      const std::size_t later = std::max(line_of[idx], line_of[*prev]);
      const std::size_t earlier = std::min(line_of[idx], line_of[*prev]);
      throw ParseError(later, std::string(to_string(out[idx].kind)) +
                                  " label overlaps the one on line " + std::to_string(earlier));
    }
    if (!prev || out[idx].end > out[*prev].end) {
      prev = idx;
    }
  }
  return out;
}

std::vector<LabelRecord> parse_labels(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_labels(in);
}

std::vector<DetectionEvent> parse_events(std::istream& in) {
  return parse_all<DetectionEvent>(
      in, [](const std::string& line, std::size_t no) { return parse_event_line(line, no); });
}

std::vector<DetectionEvent> parse_events(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_events(in);
}

void write_stream(std::ostream& out, const std::vector<StreamRecordd>& records) {
  for (const auto& r : records) {
    out << format_record(r) << '\n';
  }
}

void write_labels(std::ostream& out, const std::vector<LabelRecord>& labels) {
  for (const auto& l : labels) {
    out << format_label(l) << '\n';
  }
}

void write_events(std::ostream& out, const std::vector<DetectionEvent>& events) {
  for (const auto& e : events) {
    out << format_event(e) << '\n';
  }
}

std::string write_stream(const std::vector<StreamRecordd>& records) {
  std::ostringstream out;
  write_stream(out, records);
  return out.str();
}

std::string write_labels(const std::vector<LabelRecord>& labels) {
  std::ostringstream out;
  write_labels(out, labels);
  return out.str();
}

std::string write_events(const std::vector<DetectionEvent>& events) {
  std::ostringstream out;
  write_events(out, events);
  return out.str();
}

}  // namespace drowsy
