#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "psaflow/io.hpp"

namespace fs = std::filesystem;
using namespace psaflow;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("psaflow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }
    std::string path(const std::string& name) const { return (root_ / name).string(); }

    fs::path root_;
};

}  // namespace

TEST_F(CliTest, SynthWritesCohortFiles) {
    auto r = run({"synth", "--patients", "100", "--seed", "42", "--out", path("d")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {io::kPatientsFile, io::kPsaFile, io::kTreatmentsFile, io::kTruthFile}) {
        EXPECT_TRUE(fs::exists(root_ / "d" / f)) << f;
    }
    auto cohort = io::read_cohort_dir(root_ / "d");
    EXPECT_EQ(cohort.timelines.size(), 100u);
    EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, MissingCohortIsIoError) {
    auto r = run({"detect-tx", "--cohort", path("missing")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("missing"), std::string::npos);
    EXPECT_EQ(run({"detect-bcr", "--cohort", path("missing")}).code, 2);
    EXPECT_EQ(run({"eval", "--cohort", path("missing"), "--truth", path("t.csv"), "--out", path("o")}).code, 2);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"synth", "--out", path("d")}).code, 1);  // --patients required
    EXPECT_EQ(run({"synth", "--patients", "5", "--p-mask", "2", "--out", path("d")}).code, 1);
    EXPECT_EQ(run({"detect-tx", "--cohort", path("d"), "--mode", "some"}).code, 1);
    auto help = run({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("detect-bcr"), std::string::npos);
}

TEST_F(CliTest, MalformedInputIsValidationError) {
    ASSERT_EQ(run({"synth", "--patients", "3", "--out", path("d")}).code, 0);
    std::ofstream(root_ / "d" / io::kPsaFile, std::ios::app) << "P00001,2015-13-01,1.0,standard\n";
    auto r = run({"detect-tx", "--cohort", path("d")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("psa.csv:"), std::string::npos);
}

TEST_F(CliTest, DetectTxToStdoutOrDirectory) {
    ASSERT_EQ(run({"synth", "--patients", "40", "--p-mask", "1", "--out", path("d")}).code, 0);
    auto to_stdout = run({"detect-tx", "--cohort", path("d")});
    ASSERT_EQ(to_stdout.code, 0);
    EXPECT_EQ(to_stdout.out.rfind("patient_id,kind,date,nadir_date,psa_min\n", 0), 0u);
    ASSERT_EQ(run({"detect-tx", "--cohort", path("d"), "--out", path("o")}).code, 0);
    EXPECT_EQ(slurp(root_ / "o" / io::kDetectionsFile), to_stdout.out);
    // 40 masked patients, one detection each
    EXPECT_EQ(std::count(to_stdout.out.begin(), to_stdout.out.end(), '\n'), 41);
}

TEST_F(CliTest, PsaOnlyIsSubsetWithLaterOrEqualDates) {
    ASSERT_EQ(run({"synth", "--patients", "300", "--seed", "3", "--out", path("d")}).code, 0);
    ASSERT_EQ(run({"detect-bcr", "--cohort", path("d"), "--out", path("full")}).code, 0);
    ASSERT_EQ(run({"detect-bcr", "--cohort", path("d"), "--psa-only", "--out", path("psa")}).code, 0);
    auto full = io::read_bcr_events(root_ / "full" / io::kBcrEventsFile);
    auto psa = io::read_bcr_events(root_ / "psa" / io::kBcrEventsFile);
    EXPECT_GT(full.size(), psa.size());
    for (const auto& e : psa) {
        auto it = std::find_if(full.begin(), full.end(), [&](const BcrEvent& f) { return f.patient_id == e.patient_id; });
        ASSERT_NE(it, full.end());
        EXPECT_LE(it->bcr_date, e.bcr_date);
        EXPECT_TRUE(is_psa_based(e.source));
    }
}

TEST_F(CliTest, EvalWritesAllOutputsAndEchoesConfig) {
    std::ofstream(root_ / "rules.txt") << "prt_rise_above_nadir_ng_ml=2.5\n";
    ASSERT_EQ(run({"synth", "--patients", "60", "--p-mask", "0.5", "--out", path("d")}).code, 0);
    auto r = run({"--config", path("rules.txt"), "eval", "--cohort", path("d"), "--truth", path("d/truth.csv"), "--out",
                  path("o")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {io::kDetectionsFile, io::kBcrEventsFile, io::kMetricsFile, io::kHistogramFile,
                          io::kGradeHistogramFile}) {
        EXPECT_TRUE(fs::exists(root_ / "o" / f)) << f;
    }
    auto metrics = slurp(root_ / "o" / io::kMetricsFile);
    EXPECT_NE(metrics.find("config.prt_rise_above_nadir_ng_ml=2.5\n"), std::string::npos);
    EXPECT_NE(metrics.find("recovery.recovery_rate="), std::string::npos);
    EXPECT_NE(metrics.find("dtx.overall.matched="), std::string::npos);
    EXPECT_NE(metrics.find("bcr.true_positives="), std::string::npos);
}

TEST_F(CliTest, BadConfigIsValidationError) {
    std::ofstream(root_ / "rules.txt") << "no_such_setting=1\n";
    ASSERT_EQ(run({"synth", "--patients", "5", "--out", path("d")}).code, 0);
    auto r = run({"--config", path("rules.txt"), "detect-tx", "--cohort", path("d")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("rules.txt:1"), std::string::npos);
}

TEST_F(CliTest, ReportFromEvents) {
    ASSERT_EQ(run({"synth", "--patients", "200", "--out", path("d")}).code, 0);
    ASSERT_EQ(run({"detect-bcr", "--cohort", path("d"), "--out", path("b")}).code, 0);
    auto r = run({"report", "--events", path("b/bcr_events.csv"), "--cohort", path("d"), "--bucket-days", "365",
                  "--buckets", "5", "--out", path("r")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto hist = slurp(root_ / "r" / io::kHistogramFile);
    EXPECT_EQ(hist.rfind("bucket_start_days,bucket_end_days,count\n0,365,", 0), 0u);
    EXPECT_NE(hist.find("\n1460,,"), std::string::npos);
    EXPECT_TRUE(fs::exists(root_ / "r" / io::kGradeHistogramFile));
}
