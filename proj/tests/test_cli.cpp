#include "thurston/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace thurston::cli {
namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

// Structural check against docs/cli_schema.json: command + ok, data on
// success, typed error otherwise.
void expect_schema(const std::string& text, bool ok_expected) {
  json j = json::parse(text);
  ASSERT_TRUE(j.contains("command")) << text;
  ASSERT_TRUE(j["command"].is_string());
  ASSERT_TRUE(j.contains("ok"));
  ASSERT_TRUE(j["ok"].is_boolean());
  EXPECT_EQ(j["ok"].get<bool>(), ok_expected);
  if (ok_expected) {
    ASSERT_TRUE(j.contains("data"));
    EXPECT_TRUE(j["data"].is_object());
  } else {
    ASSERT_TRUE(j.contains("error"));
    ASSERT_TRUE(j["error"].contains("type"));
    ASSERT_TRUE(j["error"].contains("message"));
    std::string type = j["error"]["type"].get<std::string>();
    EXPECT_TRUE(type == "InputError" || type == "DomainError" || type == "FluxImbalance") << type;
  }
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string(::testing::TempDir()) + name;
  std::ofstream f(path);
  f << content;
  return path;
}

const char* kCircleTrack = R"({
  "branches": [0, 1, 2, 3],
  "switches": [
    {"sideA": [[0, 0]], "sideB": [[1, 0], [2, 0]]},
    {"sideA": [[0, 1]], "sideB": [[1, 1], [3, 0]]}
  ],
  "marks": {"0": "STUMP", "1": "STUMP", "2": "ISOLATED", "3": "ISOLATED"}
})";

TEST(Dispatch, DistSelfIsZeroExitZero) {
  RunResult r = run({"dist", "--from", "3,3,3", "--to", "3,3,3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, 2), "0\n");
}

TEST(Dispatch, UnknownFlagIsUsageErrorExitTwo) {
  RunResult r = run({"dist", "--from", "3,3,3", "--to", "3,3,3", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Dispatch, MalformedPointIsInputErrorExitTwo) {
  RunResult r = run({"dist", "--from", "3,3", "--to", "3,3,3"});
  EXPECT_EQ(r.code, 2);
  RunResult r2 = run({"dist", "--from", "1,1,1", "--to", "3,3,3"});
  EXPECT_EQ(r2.code, 2);  // relation violated
}

TEST(Dispatch, DomainErrorsExitThree) {
  RunResult r = run({"torus", "complete", "--xy", "2.1,2.1", "--root", "larger"});
  EXPECT_EQ(r.code, 3);

  std::string track = write_temp("circle.json", kCircleTrack);
  std::string bad_far = write_temp("far_bad.json", R"({"isolated": {"2": "1", "3": "2"}})");
  RunResult r2 = run({"track", "straighten", "--track", track, "--far", bad_far, "--json"});
  EXPECT_EQ(r2.code, 3);
  expect_schema(r2.out, false);
  json j = json::parse(r2.out);
  EXPECT_EQ(j["error"]["type"], "FluxImbalance");
  EXPECT_EQ(j["error"]["in"], "1");
  EXPECT_EQ(j["error"]["out"], "2");
}

TEST(Dispatch, StraightenCutRoundTripThroughFiles) {
  std::string track = write_temp("circle2.json", kCircleTrack);
  std::string far = write_temp("far_ok.json", R"({"isolated": {"2": "3/2", "3": "3/2"}})");
  std::string weights = std::string(::testing::TempDir()) + "lifted.json";
  RunResult r = run({"track", "straighten", "--track", track, "--far", far, "--out", weights});
  EXPECT_EQ(r.code, 0);
  RunResult r2 = run({"track", "cut", "--track", track, "--weights", weights, "--json"});
  EXPECT_EQ(r2.code, 0);
  expect_schema(r2.out, true);
  json j = json::parse(r2.out);
  EXPECT_EQ(j["data"]["far"]["isolated"]["2"], "3/2");
  EXPECT_EQ(j["data"]["far"]["isolated"]["3"], "3/2");
}

TEST(Dispatch, TrackFluxReportsComponents) {
  std::string track = write_temp("circle3.json", kCircleTrack);
  std::string far = write_temp("far3.json", R"({"isolated": {"2": "1", "3": "1"}})");
  RunResult r = run({"track", "flux", "--track", track, "--far", far, "--json"});
  EXPECT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_TRUE(j["data"]["straightenable"].get<bool>());
  EXPECT_EQ(j["data"]["components"].size(), 1u);
  EXPECT_EQ(j["data"]["components"][0]["in"], "1");
}

TEST(Dispatch, ProfileCsvColumns) {
  RunResult r = run({"profile", "--from", "3,3,3", "--to", "3,3,6", "--depth", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "p,q,length_src,length_dst,ratio");
}

TEST(Dispatch, EnvelopeSampleGoldenHeader) {
  std::string path = std::string(::testing::TempDir()) + "grid.csv";
  RunResult r = run({"envelope", "sample", "--x", "3,3,3", "--y", "5,3,2.7830094339741869",
                     "--rect", "2.8,5.32,2.6,3.608", "--res", "16", "--depth", "6", "--out",
                     path});
  EXPECT_EQ(r.code, 0);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "x,y,z,defect,member,label");
  int lines = 0;
  std::string line;
  while (std::getline(f, line)) ++lines;
  EXPECT_EQ(lines, 16 * 16);
}

TEST(Dispatch, DeterministicByteIdenticalOutputs) {
  std::vector<std::string> args{"envelope", "classify", "--x", "3,3,3", "--y",
                                "5,3,2.7830094339741869", "--rect", "2.8,5.32,2.6,3.608",
                                "--res", "24", "--depth", "8"};
  RunResult a = run(args);
  RunResult b = run(args);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);

  RunResult c = run({"dist", "--from", "3.7,4.1,2.38574764990196", "--to", "3,3,3", "--json"});
  RunResult d = run({"dist", "--from", "3.7,4.1,2.38574764990196", "--to", "3,3,3", "--json"});
  EXPECT_EQ(c.out, d.out);
}

TEST(Dispatch, JsonSummariesValidate) {
  for (auto args : std::vector<std::vector<std::string>>{
           {"dist", "--from", "3,3,3", "--to", "3,3,6", "--json"},
           {"lamination", "--from", "3,3,3", "--to", "5,3,2.7830094339741869", "--json"},
           {"torus", "length", "--point", "3,3,3", "--slope", "1/0", "--json"},
           {"torus", "complete", "--xy", "3,3", "--root", "larger", "--json"},
           {"boundary", "L", "--point", "3,3,3", "--eta", "1/0:1", "--json"},
           {"boundary", "criterion", "--point", "3,3,3", "--eta", "1/0:1", "--mu", "1/0:2",
            "--json"},
       }) {
    RunResult r = run(args);
    EXPECT_EQ(r.code, 0) << args[0];
    expect_schema(r.out, true);
  }
  RunResult bad = run({"torus", "complete", "--xy", "2.1,2.1", "--json"});
  EXPECT_EQ(bad.code, 3);
  expect_schema(bad.out, false);
}

TEST(Dispatch, TorusCommands) {
  RunResult r = run({"torus", "complete", "--xy", "3,3", "--root", "larger"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "3,3,6\n");
  RunResult r2 = run({"torus", "length", "--point", "3,3,3", "--slope", "1/0"});
  EXPECT_EQ(r2.code, 0);
  EXPECT_EQ(r2.out.substr(0, 7), "1.92484");
  RunResult r3 = run({"torus", "length", "--point", "3,3,3", "--slope", "2/4"});
  EXPECT_EQ(r3.code, 2);
}

TEST(Dispatch, TrackCheckReportsViolatedConditions) {
  std::string track = write_temp("circle4.json", kCircleTrack);
  std::string bad = write_temp("w_bad.json", R"({"0": "1", "1": "1", "2": "1", "3": "1"})");
  RunResult r = run({"track", "check", "--track", track, "--weights", bad, "--json"});
  EXPECT_EQ(r.code, 3);
  expect_schema(r.out, false);
  json j = json::parse(r.out);
  EXPECT_FALSE(j["data"]["switch_conditions"].get<bool>());
}

TEST(Dispatch, LaminationAmbiguousIsDomainError) {
  // A pair whose argmax is neither isolated nor descending at this depth.
  RunResult r = run({"lamination", "--from", "4.62,4.78,2.2254205140658776", "--to",
                     "4.36,4.76,2.2520982676285293", "--depth", "12"});
  EXPECT_EQ(r.code, 3);
}

TEST(Dispatch, EnvelopeContinuityRunsSchedule) {
  RunResult r = run({"envelope", "continuity", "--x", "3,3,3", "--y", "3.8,3,2.6916782087017337",
                     "--rect", "2.8,4.2,2.7,3.4", "--res", "32", "--depth", "8", "--deltas",
                     "0.1,0.05", "--json"});
  EXPECT_EQ(r.code, 0);
  expect_schema(r.out, true);
  json j = json::parse(r.out);
  EXPECT_EQ(j["data"]["results"].size(), 2u);
  EXPECT_EQ(j["data"]["results"][0]["delta"], 0.1);
}

TEST(Selftest, PassesAndReportsLines) {
  RunResult r = run({"selftest"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("selftest OK"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace thurston::cli
