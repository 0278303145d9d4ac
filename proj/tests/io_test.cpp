#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include <ommhp/io.hpp>
#include <ommhp/scenarios.hpp>

#include "support/instances.hpp"

using namespace ommhp;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ommhp_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::size_t parse_error_line(const std::string& text) {
  try {
    (void)parse_event_log(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(EventLogFormat, RoundTripIsExact) {
  const auto data = simulate_mixture(d2_scenario(3, 2, 50.0));
  const EventLog log = to_event_log(data, 2);
  const EventLog back = parse_event_log(format_event_log(log));
  EXPECT_EQ(back.ids, log.ids);
  EXPECT_EQ(back.sequences, log.sequences);
  EXPECT_EQ(back.num_types, 2u);
  EXPECT_EQ(back.horizon, 50.0);
  EXPECT_FALSE(back.is_network());
  EXPECT_EQ(format_event_log(back), format_event_log(log));
}

TEST(EventLogFormat, EmptySequencesSurviveThroughMetadata) {
  EventLog log;
  log.ids = {"quiet", "busy"};
  log.sequences = {{{}, 10.0}, {{{1.5, 1}}, 10.0}};
  log.num_types = 3;
  log.horizon = 10.0;
  const EventLog back = parse_event_log(format_event_log(log));
  EXPECT_EQ(back.ids, log.ids);
  EXPECT_EQ(back.sequences, log.sequences);
  EXPECT_EQ(back.num_types, 3u);
}

TEST(EventLogFormat, NetworkRecords) {
  EventLog log;
  log.ids = {"e0", "e1"};
  log.sequences = {{{{1.0, 0}}, 5.0}, {{{2.0, 1}, {3.0, 0}}, 5.0}};
  log.num_types = 2;
  log.horizon = 5.0;
  log.num_nodes = 3;
  log.edges = {{0, 1}, {2, 0}};
  const EventLog back = parse_event_log(format_event_log(log));
  EXPECT_TRUE(back.is_network());
  EXPECT_EQ(back.edges, log.edges);
  EXPECT_EQ(back.num_nodes, 3u);
  EXPECT_EQ(back.network().sequences, log.sequences);
}

TEST(EventLogFormat, InfersShapeWithoutMetadata) {
  const std::string text = "{\"seq\":\"a\",\"t\":1.0,\"p\":2}\n\n{\"seq\":7,\"t\":4.0,\"p\":0}\n";
  const EventLog log = parse_event_log(text);
  EXPECT_EQ(log.ids, (std::vector<std::string>{"a", "7"}));
  EXPECT_EQ(log.num_types, 3u);
  EXPECT_EQ(log.horizon, 4.0);
}

TEST(EventLogFormat, ErrorsNameTheLine) {
  EXPECT_EQ(parse_error_line("{\"horizon\":10}\n{\"seq\":\"a\",\"t\":1}\n"), 2u);
  EXPECT_EQ(parse_error_line("{\"seq\":\"a\",\"t\":1,\"p\":0}\nnot json\n"), 2u);
  EXPECT_EQ(parse_error_line("{\"seq\":\"a\",\"t\":1,\"p\":0.5}\n"), 1u);
  EXPECT_EQ(parse_error_line("{\"seq\":\"a\",\"t\":1,\"p\":-1}\n"), 1u);
  EXPECT_EQ(parse_error_line("{\"seq\":\"a\",\"t\":3,\"p\":0}\n{\"seq\":\"a\",\"t\":2,\"p\":0}\n"), 2u);
  EXPECT_EQ(parse_error_line("{\"horizon\":5,\"types\":2}\n{\"seq\":\"a\",\"t\":6,\"p\":0}\n"), 2u);
  EXPECT_EQ(parse_error_line("{\"horizon\":5,\"types\":2}\n{\"seq\":\"a\",\"t\":1,\"p\":2}\n"), 2u);
  EXPECT_EQ(parse_error_line("{\"seq\":\"a\",\"t\":1,\"p\":0,\"src\":0,\"dst\":1}\n"
                             "{\"seq\":\"b\",\"t\":2,\"p\":0}\n"),
            2u);
  EXPECT_EQ(parse_error_line("{\"seq\":\"a\",\"t\":1,\"p\":0,\"src\":0,\"dst\":1}\n"
                             "{\"seq\":\"a\",\"t\":2,\"p\":0,\"src\":1,\"dst\":0}\n"),
            2u);
  EXPECT_EQ(parse_error_line("[1,2]\n"), 1u);
}

TEST(EventLogFormat, EmptyLogHasNoSequences) {
  try {
    (void)parse_event_log("\n\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "no sequences");
  }
}

TEST(Labels, RoundTripAndHeaders) {
  const LabelTable labels{{"s0", 0}, {"s,1", 2}};
  EXPECT_EQ(parse_labels(format_labels(labels)), labels);
  EXPECT_EQ(parse_labels(format_labels(labels, "node")), labels);
  EXPECT_EQ(parse_labels("a,1\nb,0\n"), (LabelTable{{"a", 1}, {"b", 0}}));
  EXPECT_THROW((void)parse_labels("seq,label\nx,one\n"), ParseError);
  EXPECT_THROW((void)parse_labels("seq,label\nx,-1\n"), ParseError);
  EXPECT_THROW((void)parse_labels("seq,label\nnolabel\n"), ParseError);
}

TEST(ModelJson, RoundTripIsExact) {
  Rng rng(3);
  MixtureModel m{{testing_support::random_cluster(rng, 3), testing_support::random_cluster(rng, 3)},
                 {0.25, 0.75}};
  EXPECT_EQ(model_from_json(Json::parse(model_to_json(m).dump())), m);
}

TEST(ModelJson, ScalarDecayAndDefaultPrior) {
  const auto j = Json::parse(R"({"clusters":[{"mu":[0.3],"a":[[0.2]],"b":3.1},{"mu":[2.8],"a":[[0.6]],"b":3.1}]})");
  const auto m = model_from_json(j);
  EXPECT_EQ(m.prior, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(m.clusters[1].decay(0, 0), 3.1);
  EXPECT_THROW((void)model_from_json(Json::parse(R"({"clusters":[{"mu":[0.3]}]})")), ValidationError);
  EXPECT_THROW((void)model_from_json(Json::parse(R"({"clusters":[{"mu":[-1],"a":[[0]],"b":1}]})")),
               ValidationError);
}

TEST(Trajectory, ColumnsFollowClusterCount) {
  FitTrajectory t;
  t.records.push_back({1, -3.5, {0.4, 0.6}, {0.1, 0.2}, {0.3, 0.4}, std::nullopt});
  const std::string csv = format_trajectory(t, 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "interval,elbo,pi_0,pi_1,relerr_mu_0,relerr_mu_1,relerr_a_0,relerr_a_1");
  EXPECT_NE(csv.find("1,-3.5,0.40000000000000002,0.59999999999999998"), std::string::npos);
}

TEST_F(TempDir, AtomicWriteLeavesNoTemporary) {
  const fs::path p = dir_ / "nested" / "out.txt";
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_file(p), "second");
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
}

TEST_F(TempDir, FileErrorsAreIoErrors) {
  EXPECT_THROW((void)read_file(dir_ / "missing.jsonl"), IoError);
  fs::create_directories(dir_ / "blocked");
  EXPECT_THROW(write_file_atomic(dir_ / "blocked", "x"), IoError);
}

TEST_F(TempDir, FilesRoundTrip) {
  const auto data = simulate_mixture(d1_scenario(1, 2, 30.0));
  write_event_log(dir_ / "events.jsonl", to_event_log(data, 2));
  EXPECT_EQ(read_event_log(dir_ / "events.jsonl").sequences, data.sequences);
  const MixtureModel m{{synthetic_processes()[0]}, {1.0}};
  write_json(dir_ / "model.json", model_to_json(m));
  EXPECT_EQ(read_model(dir_ / "model.json"), m);
  write_file_atomic(dir_ / "bad.json", "{");
  EXPECT_THROW((void)read_json(dir_ / "bad.json"), ParseError);
}
