#include <drowsy/ear.hpp>
#include <drowsy/stream_io.hpp>
#include <drowsy/synth.hpp>

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace drowsy;

namespace {

const char* kEyesLine =
    R"({"t":0.033,"le":[[0,0],[1,1],[3,1],[4,0],[3,-1],[1,-1]],"re":[[0,0],[1,1],[3,1],[4,0],[3,-1],[1,-1]]})";

std::string face_line(int points, double t = 0.0) {
  std::string s = "{\"t\":" + std::to_string(t) + ",\"face\":true,\"lm\":[";
  for (int i = 0; i < points; ++i) {
    s += (i ? ",[" : "[") + std::to_string(i) + "," + std::to_string(2 * i) + "]";
  }
  return s + "]}";
}

std::size_t error_line(const std::string& text) {
  try {
    parse_stream(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(ParseStream, NoFaceRecord) {
  const auto records = parse_stream(R"({"t":0.0,"face":false})");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].t, 0.0);
  EXPECT_FALSE(records[0].has_face());
}

TEST(ParseStream, EyesOnlyRecordAveragesToHalf) {
  const auto records = parse_stream(kEyesLine);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].t, 0.033);
  ASSERT_TRUE(std::holds_alternative<EyePaird>(records[0].payload));
  EXPECT_EQ(*record_ear(records[0]), 0.5);
}

TEST(ParseStream, FullFaceRecord) {
  const auto records = parse_stream(face_line(68, 1.5));
  ASSERT_EQ(records.size(), 1u);
  const auto& face = std::get<FaceLandmarksd>(records[0].payload);
  EXPECT_EQ(face.point(36), Point2d(36, 72));
}

TEST(ParseStream, WrongLandmarkCountNamesLine) {
  const std::string text = std::string(kEyesLine) + "\n" + face_line(67) + "\n";
  try {
    parse_stream(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(e.reason().find("67"), std::string::npos);
  }
}

TEST(ParseStream, MalformedLines) {
  EXPECT_EQ(error_line("{\"t\":0,\"face\":false}\nnot json\n"), 2u);
  EXPECT_EQ(error_line("[1,2]"), 1u);
  EXPECT_EQ(error_line("{\"face\":false}"), 1u);
  EXPECT_EQ(error_line("{\"t\":\"0\",\"face\":false}"), 1u);
  EXPECT_EQ(error_line("{\"t\":0}"), 1u);
  EXPECT_EQ(error_line("{\"t\":0,\"face\":1}"), 1u);
  EXPECT_EQ(error_line("{\"t\":0,\"face\":true}"), 1u);
  EXPECT_EQ(error_line("{\"t\":0,\"face\":false,\"lm\":[]}"), 1u);
  EXPECT_EQ(error_line("{\"t\":0,\"le\":[[0,0]],\"re\":[[0,0]]}"), 1u);
  EXPECT_EQ(error_line("{\"t\":0,\"le\":[[0,0],[1,1],[3,1],[4,0],[3,-1],[1,-1]]}"), 1u);
  EXPECT_EQ(error_line("{\"t\":1e999,\"face\":false}"), 1u);
  EXPECT_EQ(error_line("{\"t\":0,\"le\":[[0,0],[1,1],[3,1],[4,0],[3,-1],[1]],"
                       "\"re\":[[0,0],[1,1],[3,1],[4,0],[3,-1],[1,-1]]}"),
            1u);
}

TEST(ParseStream, TimestampRegression) {
  EXPECT_EQ(error_line("{\"t\":1.0,\"face\":false}\n\n{\"t\":0.5,\"face\":false}"), 3u);
  EXPECT_NO_THROW(parse_stream("{\"t\":1.0,\"face\":false}\n{\"t\":1.0,\"face\":false}"));
}

TEST(ParseStream, SkipsBlankLines) {
  EXPECT_EQ(parse_stream("\n{\"t\":0,\"face\":false}\n\n  \n").size(), 1u);
}

TEST(ParseStream, ReaderIsIncremental) {
  std::istringstream in("{\"t\":0,\"face\":false}\n{\"t\":1,\"face\":false}\nbroken\n");
  StreamReader reader(in);
  EXPECT_TRUE(reader.next().has_value());
  EXPECT_TRUE(reader.next().has_value());
  EXPECT_THROW(reader.next(), ParseError);
}

TEST(Labels, ParseOneDrowsyEpisode) {
  const auto labels = parse_labels(R"({"kind":"drowsy","start":1.0,"end":2.5})");
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].kind, LabelKind::Drowsy);
  EXPECT_EQ(labels[0].duration(), 1.5);
  EXPECT_TRUE(labels[0].contains(1.0));
  EXPECT_FALSE(labels[0].contains(2.5));
}

TEST(Labels, OverlapOfSameKindIsRejected) {
  const std::string text =
      "{\"kind\":\"drowsy\",\"start\":1.0,\"end\":2.0}\n"
      "{\"kind\":\"blink\",\"start\":1.5,\"end\":1.7}\n"
      "{\"kind\":\"drowsy\",\"start\":1.9,\"end\":3.0}\n";
  try {
    parse_labels(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  // Touching half-open intervals do not overlap.
  EXPECT_NO_THROW(parse_labels("{\"kind\":\"blink\",\"start\":1,\"end\":2}\n"
                               "{\"kind\":\"blink\",\"start\":2,\"end\":3}\n"));
  EXPECT_THROW(validate_labels({{LabelKind::Blink, 0, 2}, {LabelKind::Blink, 1, 3}}),
               std::invalid_argument);
}

TEST(Labels, InvalidRecords) {
  EXPECT_THROW(parse_labels(R"({"kind":"sleepy","start":1,"end":2})"), ParseError);
  EXPECT_THROW(parse_labels(R"({"kind":"blink","start":2,"end":2})"), ParseError);
  EXPECT_THROW(parse_labels(R"({"kind":"blink","start":2})"), ParseError);
}

TEST(Events, FormatIsByteExact) {
  EXPECT_EQ(format_event({EventKind::BlinkDetected, 0.1, 3, 3}),
            R"({"kind":"BlinkDetected","t":0.1,"frame":3,"duration":3})");
  EXPECT_EQ(format_event({EventKind::DrowsyOnset, 2.0, 60, 0}),
            R"({"kind":"DrowsyOnset","t":2.0,"frame":60})");
  EXPECT_EQ(format_label({LabelKind::Drowsy, 1.0, 2.5}),
            R"({"kind":"drowsy","start":1.0,"end":2.5})");
}

TEST(Events, InvalidRecords) {
  EXPECT_THROW(parse_events(R"({"kind":"Nope","t":0,"frame":0})"), ParseError);
  EXPECT_THROW(parse_events(R"({"kind":"BlinkDetected","t":0,"frame":0})"), ParseError);
  EXPECT_THROW(parse_events(R"({"kind":"BlinkDetected","t":0,"frame":0,"duration":0})"),
               ParseError);
  EXPECT_THROW(parse_events(R"({"kind":"DrowsyOnset","t":0,"frame":-1})"), ParseError);
  EXPECT_THROW(parse_events(R"({"kind":"DrowsyOnset","t":0,"frame":1,"duration":2})"),
               ParseError);
}

TEST(RoundTrip, RandomEventsLabelsAndStreams) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> real(-1e4, 1e4);
  std::uniform_int_distribution<int> kind(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DetectionEvent> events;
    double t = 0.0;
    for (std::uint64_t i = 0; i < 40; ++i) {
      t += std::abs(real(rng)) * 1e-3;
      const auto k = static_cast<EventKind>(kind(rng));
      events.push_back({k, t, i * 7, k == EventKind::BlinkDetected ? static_cast<std::uint32_t>(1 + i % 19) : 0u});
    }
    EXPECT_EQ(parse_events(write_events(events)), events);

    std::vector<LabelRecord> labels;
    double s = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double len = 1e-3 + std::abs(real(rng)) * 1e-4;
      labels.push_back({i % 2 ? LabelKind::Blink : LabelKind::Drowsy, s, s + len});
      s += len;
    }
    EXPECT_EQ(parse_labels(write_labels(labels)), labels);

    std::vector<StreamRecordd> stream;
    for (int i = 0; i < 30; ++i) {
      StreamRecordd r;
      r.t = i * 0.0333333333333;
      if (i % 3 == 0) {
        r.payload = NoFace{};
      } else if (i % 3 == 1) {
        EyePaird eyes;
        for (Eigen::Index k = 0; k < 12; ++k) {
          eyes.left(k) = real(rng);
          eyes.right(k) = real(rng);
        }
        r.payload = eyes;
      } else {
        Eigen::Matrix2Xd pts(2, 68);
        for (Eigen::Index k = 0; k < pts.size(); ++k) pts(k) = real(rng);
        r.payload = FaceLandmarksd::from_points(pts);
      }
      stream.push_back(r);
    }
    EXPECT_EQ(parse_stream(write_stream(stream)), stream);
  }
}

TEST(RoundTrip, WriteIsStableOnReparse) {
  SynthConfig c;
  c.duration = 5;
  c.noise_sigma = 1.3;
  c.dropout_prob = 0.1;
  c.seed = 3;
  const auto text = write_stream(generate(c).stream);
  EXPECT_EQ(write_stream(parse_stream(text)), text);
}

TEST(AppendDouble, AlwaysReadsBackAsFloating) {
  std::string s;
  append_double(s, 3.0);
  EXPECT_EQ(s, "3.0");
  s.clear();
  append_double(s, 1e300);
  EXPECT_EQ(s, "1e+300");
  EXPECT_THROW(append_double(s, std::nan("")), std::invalid_argument);
}
