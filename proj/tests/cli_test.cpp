#include <gtest/gtest.h>

#include "cli_runner.hpp"

namespace fs = std::filesystem;
using clitest::run;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("finmoji_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run({"synth", "--n", "3000", "--seed", "3", "-o", path("raw.jsonl")}, dir_ / "s").exit_code, 0);
    ASSERT_EQ(run({"synth", "--n", "1500", "--seed", "4", "--id-prefix", "other", "-o", path("other.jsonl")}, dir_ / "s")
                  .exit_code,
              0);
    ASSERT_EQ(run({"prepare", "-i", path("raw.jsonl"), "-o", path("prep")}, dir_ / "s").exit_code, 0);
    std::ofstream(path("prices.csv")) << "date,close\n2021-01-01,10\n2021-01-02,12\n2021-01-03,11\n2021-01-04,15\n"
                                         "2021-01-05,14\n";
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static clitest::RunResult ok(const std::vector<std::string>& args) {
    auto r = run(args, dir_ / "run");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return r;
  }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  const auto missing = run({"prepare", "-i", path("nope.jsonl"), "-o", path("x")}, dir_ / "e");
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_TRUE(missing.out.empty());
  EXPECT_EQ(run({}, dir_ / "e").exit_code, 2);
  EXPECT_EQ(run({"--help"}, dir_ / "e").exit_code, 0);
  EXPECT_EQ(run({"prepare", "-i", path("raw.jsonl"), "-o", path("x"), "--test-fraction", "2"}, dir_ / "e").exit_code, 2);
}

TEST_F(Cli, DataErrors) {
  std::ofstream(path("bad.jsonl")) << "{oops\n";
  const auto r = run({"entropy", "-i", path("bad.jsonl")}, dir_ / "e");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("zero parseable records"), std::string::npos);
}

TEST_F(Cli, PrepareBalancesAndIsDeterministic) {
  const auto j = json::parse(ok({"prepare", "-i", path("raw.jsonl"), "-o", path("prep2")}).out);
  EXPECT_EQ(j["counts"]["train"]["bullish"], j["counts"]["train"]["bearish"]);
  EXPECT_EQ(j["counts"]["test"]["bullish"], j["counts"]["test"]["bearish"]);
  EXPECT_EQ(j["manifest"]["inputs"][0]["sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(clitest::slurp(path("prep/train.jsonl")), clitest::slurp(path("prep2/train.jsonl")));
  EXPECT_EQ(clitest::slurp(path("prep/test.jsonl")), clitest::slurp(path("prep2/test.jsonl")));
}

TEST_F(Cli, TrainEvalAndVectorizerMismatch) {
  ok({"train", "--train", path("prep/train.jsonl"), "--variant", "emoji", "--model-out", path("m.json")});
  const auto e = json::parse(ok({"eval", "--model-in", path("m.json"), "--test", path("prep/test.jsonl"),
                                 "--bootstrap", "200", "--csv", path("eval.csv")})
                                 .out);
  EXPECT_GT(e["report"]["accuracy"].get<double>(), 0.85);
  const auto& acc = e["bootstrap"]["metrics"]["accuracy"];
  EXPECT_LE(acc["lo"].get<double>(), e["report"]["accuracy"].get<double>());
  EXPECT_GE(acc["hi"].get<double>(), e["report"]["accuracy"].get<double>());
  EXPECT_NE(clitest::slurp(path("eval.csv")).find("bullish_f1,"), std::string::npos);

  auto model = json::parse(clitest::slurp(path("m.json")));
  model["vectorizer"]["formula_id"] = "sklearn-default";
  std::ofstream(path("m_bad.json")) << model.dump();
  EXPECT_EQ(run({"eval", "--model-in", path("m_bad.json"), "--test", path("prep/test.jsonl")}, dir_ / "e").exit_code, 3);
  EXPECT_EQ(run({"eval", "--model-in", path("m.json"), "--test", path("prep/test.jsonl"), "--variant", "text"},
                dir_ / "e")
                .exit_code,
            3);
}

TEST_F(Cli, LexiconTopK) {
  const auto j = json::parse(ok({"lexicon", "-i", path("raw.jsonl"), "--top-k", "1", "--pairs", "--buckets",
                                 "--out-dir", path("lex")})
                                 .out);
  ASSERT_EQ(j["lexicon"]["singles"].size(), 1u);
  EXPECT_EQ(j["lexicon"]["singles"][0]["emoji"], "🚀");
  EXPECT_EQ(j["buckets"].size(), 10u);
  for (const char* f : {"lexicon.json", "singles.csv", "pairs.csv", "buckets.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "lex" / f)) << f;
  }
}

TEST_F(Cli, CompareIdenticalCorpora) {
  const auto j = json::parse(ok({"compare", path("raw.jsonl"), path("raw.jsonl")}).out);
  EXPECT_EQ(j["cramers_v"].get<double>(), 0.0);
  EXPECT_EQ(j["tests"][2]["p_value"].get<double>(), 1.0);
}

TEST_F(Cli, CurveTwoRows) {
  const auto j = json::parse(ok({"curve", "--train", path("prep/train.jsonl"), "--test", path("prep/test.jsonl"),
                                 "--sizes", "100,1000", "--csv", path("curve.csv")})
                                 .out);
  EXPECT_EQ(j["rows"].size(), 2u);
  const auto csv = clitest::slurp(path("curve.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.rfind("size,accuracy,f1,vocab_size\n", 0), 0u);
}

TEST_F(Cli, BenchReportsMinAndMedian) {
  const auto j = json::parse(ok({"bench", "--train", path("prep/train.jsonl"), "--infer", path("prep/test.jsonl")}).out);
  EXPECT_EQ(j["repeats"], 5);
  const auto& t = j["timings"]["train_seconds"];
  EXPECT_EQ(t["runs"].size(), 5u);
  EXPECT_LE(t["min"].get<double>(), t["median"].get<double>());
}

TEST_F(Cli, IndexWithPrices) {
  const auto j = json::parse(ok({"index", "-i", path("raw.jsonl"), "--prices", path("prices.csv")}).out);
  EXPECT_TRUE(j["correlation"]["levels"].is_number());
  EXPECT_TRUE(j["correlation"]["changes"].is_number());
  EXPECT_GE(j["series"].size(), 5u);
}

TEST_F(Cli, ConfigFile) {
  std::ofstream(path("cfg.ini")) << "[compare]\ntop = 2\n";
  const auto j = json::parse(ok({"--config", path("cfg.ini"), "compare", path("raw.jsonl"), path("other.jsonl")}).out);
  EXPECT_EQ(j["manifest"]["parameters"]["top"], 2);
}

TEST_F(Cli, RepeatedRunsAreIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"prepare", "-i", path("raw.jsonl"), "-o", path("det")},
      {"train", "--train", path("prep/train.jsonl"), "--family", "nb", "--model-out", path("det_m.json")},
      {"eval", "--model-in", path("det_m.json"), "--test", path("prep/test.jsonl"), "--bootstrap", "100"},
      {"lexicon", "-i", path("raw.jsonl"), "--pairs"},
      {"compare", path("raw.jsonl"), path("other.jsonl")},
      {"curve", "--train", path("prep/train.jsonl"), "--test", path("prep/test.jsonl"), "--sizes", "50,200"},
      {"bench", "--train", path("prep/train.jsonl"), "--infer", path("prep/test.jsonl"), "--repeats", "2"},
      {"entropy", "-i", path("raw.jsonl")},
      {"index", "-i", path("raw.jsonl"), "--prices", path("prices.csv")},
      {"synth", "--n", "200", "-o", path("det_synth.jsonl")},
  };
  for (const auto& cmd : commands) {
    const auto first = ok(cmd), second = ok(cmd);
    EXPECT_EQ(clitest::payload(first.out), clitest::payload(second.out)) << cmd[0];
  }
}
