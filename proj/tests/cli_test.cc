#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_support.h"

namespace {

using nlohmann::json;

struct Result {
  int exit_code = -1;
  std::string out;
};

Result RunCli(const std::string& args) {
  const std::string command = std::string(PAXCONNECT_CLI_PATH) + " " + args + " 2>/dev/null";
  Result result;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer;
  std::size_t n;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.out.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

constexpr const char* kSmall =
    " --rows 5000 --minority 0.08 --rounds 10 --max-depth 4 --components 4 --shap-rows 20";

TEST(CliTest, UnknownStageIsAUsageError) {
  EXPECT_EQ(RunCli("run --stage someday").exit_code, 2);
  EXPECT_EQ(RunCli("baseline --stage someday").exit_code, 2);
}

TEST(CliTest, UnknownSubcommandOptionIsAUsageError) {
  EXPECT_EQ(RunCli("run --stage tactical --no-such-flag").exit_code, 2);
}

TEST(CliTest, MissingStageIsAUsageError) {
  EXPECT_EQ(RunCli("run").exit_code, 2);
}

TEST(CliTest, RunWritesABundleThenCostAndCompareReadIt) {
  paxconnect::testing::TempDir tmp;
  const std::string dir = (tmp.path() / "tactical").string();
  const Result run = RunCli("run --stage tactical --seed 7 --json --out " + dir + kSmall);
  ASSERT_EQ(run.exit_code, 0) << run.out;
  const json report = json::parse(run.out);
  EXPECT_EQ(report.at("stage"), "tactical");
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "tactical" / "model.json"));

  for (const double r : {1.05, 1.16, 1.5, 3.0}) {
    const Result cost = RunCli("cost --json --report " + dir + " --r " + std::to_string(r));
    ASSERT_EQ(cost.exit_code, 0);
    const json analysis = json::parse(cost.out);
    const double precision = analysis.at("precision");
    const double delta = analysis.at("delta_c");
    EXPECT_EQ(delta <= 0.0, precision >= 1.0 / r) << r;
  }

  const Result compare = RunCli("compare --json " + dir);
  ASSERT_EQ(compare.exit_code, 0);
  const json table = json::parse(compare.out);
  ASSERT_EQ(table.size(), 4u);
  EXPECT_TRUE(table[2].at("present").get<bool>());
  EXPECT_FALSE(table[0].at("present").get<bool>());

  const Result bad_r = RunCli("cost --report " + dir + " --r -1");
  EXPECT_EQ(bad_r.exit_code, 2);
}

TEST(CliTest, BaselineReportsTheSweep) {
  const Result r = RunCli("baseline --stage strategic --json --rows 3000");
  ASSERT_EQ(r.exit_code, 0);
  const json report = json::parse(r.out);
  EXPECT_EQ(report.at("sweep").size(), 51u);
  EXPECT_EQ(report.at("time_feature"), "scheduled");
}

TEST(CliTest, SynthWritesACsv) {
  paxconnect::testing::TempDir tmp;
  const std::string path = (tmp.path() / "c.csv").string();
  const Result r = RunCli("synth --rows 500 --seed 3 --json --out " + path);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out).at("rows").get<int>(), 500);
  EXPECT_TRUE(std::filesystem::exists(path));
}

TEST(CliTest, MissingReportIsAUsageError) {
  EXPECT_EQ(RunCli("cost --report /nonexistent/report.json").exit_code, 2);
}

}  // namespace
