// End-to-end tests of the musrover command-line tool.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "musrover/artifacts.h"
#include "musrover/corpus.h"
#include "test_util.h"

namespace musrover {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "musrover_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const Sonority a = {72, 67, 64, 48}, b = {71, 67, 62, 43}, c = {72, 64, 60, 45},
                   d = {74, 65, 59, 43};
    std::vector<Piece> pieces = {testing::pieceFromColumns("one", {a, b, c, a, d, b, a}),
                                 testing::pieceFromColumns("two", {c, d, a, b, a, c})};
    writeFile(dir_ / "corpus.json", serializePieces(pieces));
  }

  int run(const std::string& args) {
    std::string cmd = std::string(MUSROVER_BIN) + " " + args + " > " +
                      (dir_ / "stdout.txt").string() + " 2> " + (dir_ / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string out() const { return readFile(dir_ / "stdout.txt"); }

  fs::path dir_;
};

TEST_F(CliTest, IngestAndDescribe) {
  EXPECT_EQ(run("ingest --corpus " + path("corpus.json")), 0);
  EXPECT_NE(out().find("columns: 13"), std::string::npos);
  EXPECT_EQ(run("ingest --validate-only --corpus " + path("corpus.json")), 0);
  EXPECT_EQ(run("describe --feature interv12@1,4"), 0);
  EXPECT_NE(out().find("between soprano and bass"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("trace --alpha 0.5"), 1);
  EXPECT_EQ(run("describe --feature order@3"), 2);
  writeFile(dir_ / "bad.json", R"({"pieces":[{"id":"x","voices":[[[60,1]]]}]})");
  EXPECT_EQ(run("ingest --corpus " + path("bad.json")), 2);
  EXPECT_EQ(run("ingest --corpus " + path("missing.json")), 2);
  EXPECT_EQ(run("trace --alpha 3 --corpus " + path("corpus.json") + " --out " + path("o")), 2);
}

TEST_F(CliTest, TraceBigramSampleReport) {
  const std::string corpus = path("corpus.json");
  ASSERT_EQ(run("rulebook --corpus " + corpus + " --out " + path("rb")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "rb" / "rulebook.json"));
  ASSERT_EQ(run("trace --corpus " + corpus + " --alpha 0.5 --epsilon 0.001 --max-iters 4 " +
                "--objective shannon --out " + path("t")),
            0);
  for (const char* f : {"trace_0.5.json", "footprints_0.5.csv", "student_0.5.json",
                        "rulebook.json", "report.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "t" / f)) << f;
  }
  ASSERT_EQ(run("bigram --corpus " + corpus + " --from-trace " + path("t/trace_0.5.json") +
                " --alpha 1 --max-iters 2 --out " + path("b")),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "b" / "trace_bigram_1.json"));
  EXPECT_TRUE(fs::exists(dir_ / "b" / "student_bigram_1.json"));
  ASSERT_EQ(run("sample --model " + path("b/student_bigram_1.json") +
                " --length 16 --seed 5 --out " + path("s.json")),
            0);
  CorpusModel sampled = loadCorpus(path("s.json"));
  EXPECT_EQ(sampled.column_count, 16u);
  ASSERT_EQ(run("report --trace " + path("t/trace_0.5.json") + " --epsilon 0.001"), 0);
  EXPECT_NE(out().find("E_eps"), std::string::npos);

  // A trace from a different corpus is refused.
  writeFile(dir_ / "other.json",
            serializePieces({testing::pieceFromColumns("z", {{60, 55, 52, 48}, {62, 55, 50, 47}})}));
  EXPECT_EQ(run("bigram --corpus " + path("other.json") + " --from-trace " +
                path("t/trace_0.5.json") + " --out " + path("x")),
            2);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  const std::string corpus = path("corpus.json");
  for (const char* o : {"r1", "r2"}) {
    ASSERT_EQ(run("trace --corpus " + corpus + " --max-iters 3 --out " + path(o)), 0);
  }
  for (const auto& entry : fs::directory_iterator(dir_ / "r1")) {
    EXPECT_EQ(readFile(entry.path()), readFile(dir_ / "r2" / entry.path().filename()))
        << entry.path().filename();
  }
}

}  // namespace
}  // namespace musrover
