#include <gtest/gtest.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rswave/error.hpp"
#include "rswave_cli/commands.hpp"
#include "rswave_cli/config.hpp"
#include "rswave_cli/csv.hpp"

using namespace rswave;
using namespace rswave::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliRun : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("rswave_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string base(const std::string& extra, const std::string& T = "2.5") const {
        return "[geometry]\nlo = 0\nhi = 1\nx0 = -0.1\nkappa = 0.95\nT = " + T +
               "\n[output]\ndir = " + dir_.string() + "\n" + extra;
    }

    CommandOutcome run(const std::string& cmd, const std::string& text) {
        std::ostringstream log;
        auto out = run_command(cmd, RawConfig::from_string(text), log);
        log_ = log.str();
        return out;
    }

    fs::path dir_;
    std::string log_;
};

}  // namespace

TEST(Config, RejectsUnknownSectionsAndKeys) {
    EXPECT_THROW(RawConfig::from_string("[bogus]\na = 1\n"), ConfigError);
    EXPECT_THROW(RawConfig::from_string("[geometry]\nradius = 1\n"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_raw(RawConfig::from_string("[discretization]\nnx = ten\n")), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_raw(RawConfig::from_string("[discretization]\nscheme = euler\n")),
                 ConfigError);
}

TEST(Config, HashIsCanonical) {
    const auto a = RawConfig::from_string("[geometry]\nT = 2.5\nx0 = -0.1\n[mc]\nseed = 3\n");
    const auto b = RawConfig::from_string("[mc]\nseed = 3\n[geometry]\nx0 = -0.1\nT = 2.5\n");
    const auto c = RawConfig::from_string("[mc]\nseed = 4\n[geometry]\nx0 = -0.1\nT = 2.5\n");
    EXPECT_EQ(a.canonical(), b.canonical());
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_EQ(hex64(a.hash()).size(), 16u);
}

TEST(Config, InvalidGeometryIsGeometryError) {
    EXPECT_THROW(ExperimentConfig::from_raw(RawConfig::from_string("[geometry]\nx0 = 0.5\n")), GeometryError);
}

TEST(Csv, DoublesRoundTrip) {
    for (double v : {0.1, 2.2000000000000002, -1e-300, 12345.678901234567, 1.0 / 3.0}) {
        const std::string s = format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        EXPECT_EQ(back, v) << s;
    }
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST_F(CliRun, GeometryTable) {
    const auto out = run("geometry", base(""));
    EXPECT_EQ(out.code, kExitOk);
    ASSERT_EQ(out.files.size(), 1u);
    const std::string text = slurp(out.files[0]);
    EXPECT_EQ(text.rfind("# config_hash=", 0), 0u);
    EXPECT_NE(text.find("Tstar,2.2000000000000002"), std::string::npos);
    EXPECT_NE(text.find("gamma0_face,x=hi"), std::string::npos);
}

TEST_F(CliRun, ExitCodes) {
    EXPECT_EQ(run("geometry", "[geometry]\nx0 = 0.5\n[output]\ndir = " + dir_.string() + "\n").code,
              kExitGeometry);
    EXPECT_EQ(run("geometry", base("[carleman]\nbeta = 0.1\nr2 = 1\n")).code, kExitCondition);
    EXPECT_NE(log_.find("condition (3) fails"), std::string::npos);
    EXPECT_EQ(run("control", base("[control]\nstrict = true\n", "1")).code, kExitCondition);
    EXPECT_EQ(run("control", base("[discretization]\nnx = 20\n[control]\ny0 = 0\n")).code, kExitOk);
    EXPECT_EQ(run("observability",
                  base("[discretization]\nnx = 20\n[control]\nfamily = config\nzT = 0\nscan_T = 1, 2\n"))
                  .code,
              kExitDegenerate);
    EXPECT_EQ(run("control", base("[discretization]\nnx = 20\n[control]\nmax_iter = 1\ntol = 1e-14\n")).code,
              kExitStagnation);
    EXPECT_EQ(run("geometry", "[geometry]\nT = oops\n").code, kExitUsage);
}

TEST_F(CliRun, RerunsAreByteIdentical) {
    const std::string cfg =
        base("[discretization]\nnx = 20\n[control]\nfamily = sine1, bump\nscan_T = 1, 2.5\n[mc]\nworkers = 1\n");
    const auto a = run("observability", cfg);
    ASSERT_EQ(a.code, kExitOk);
    std::vector<std::string> first;
    for (const auto& f : a.files) first.push_back(slurp(f));
    ::setenv("RSWAVE_WORKERS", "2", 1);
    const auto b = run("observability", cfg);
    ::unsetenv("RSWAVE_WORKERS");
    ASSERT_EQ(b.files, a.files);
    for (std::size_t i = 0; i < a.files.size(); ++i) EXPECT_EQ(slurp(b.files[i]), first[i]) << a.files[i];
}

TEST(Workers, EnvironmentOverridesConfig) {
    auto cfg = ExperimentConfig::from_raw(RawConfig::from_string("[mc]\nworkers = 3\n"));
    ::unsetenv("RSWAVE_WORKERS");
    EXPECT_EQ(cfg.workers(), 3);
    ::setenv("RSWAVE_WORKERS", "2", 1);
    EXPECT_EQ(cfg.workers(), 2);
    ::unsetenv("RSWAVE_WORKERS");
}
