#include "rtmix/cli.hpp"
#include "rtmix/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace rtmix;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rtmix_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& text) {
    const fs::path p = dir_ / "study.ini";
    std::ofstream(p) << text;
    return p;
  }

  int invoke(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    args.insert(args.begin(), "rtmix_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kSmallConvergence = R"([study]
mode = convergence
r = 0
M_list = 4, 8
T = 0.25

[problem]
example = allen_cahn_2d
)";

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string f;
  std::istringstream is(line);
  while (std::getline(is, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST_F(CliTest, ConvergenceCsvToStdout) {
  const auto cfg = write_config(kSmallConvergence);
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", "-"}), kExitOk) << err_.str();
  const auto rows = lines(out_.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "M,tau,r,err_u_L2,err_sigma_L2,order_u,order_sigma,dg_norm,ratio_p2,ratio_p3,ratio_p4,ratio_p6,wall_time_s");
  const auto first = fields(rows[1]), second = fields(rows[2]);
  ASSERT_EQ(first.size(), 13u);
  EXPECT_EQ(first[0], "4");
  EXPECT_EQ(first[1], "0.25");
  EXPECT_TRUE(first[5].empty());
  EXPECT_TRUE(first[6].empty());
  EXPECT_FALSE(second[5].empty());
  EXPECT_TRUE(second[12].empty());  // wall time is opt-in
}

TEST_F(CliTest, IdenticalConfigGivesIdenticalCsv) {
  const auto cfg = write_config(kSmallConvergence);
  const fs::path a = dir_ / "a.csv", b = dir_ / "b.csv", c = dir_ / "c.csv";
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", a.string()}), kExitOk);
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", b.string()}), kExitOk);
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", c.string(), "--threads", "2"}), kExitOk);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a), slurp(c));
}

TEST_F(CliTest, UnsupportedDegreeExitsWithConfigCode) {
  const auto cfg = write_config("[study]\nmode = solve\nr = 3\nM_list = 4\n[problem]\nexample = allen_cahn_2d\n");
  EXPECT_EQ(invoke({"--config", cfg.string()}), kExitConfig);
  EXPECT_NE(err_.str().find("r in {0,1,2}"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ConfigErrors) {
  EXPECT_EQ(invoke({"--config", (dir_ / "missing.ini").string()}), kExitConfig);
  EXPECT_EQ(invoke({}), kExitConfig);
  const auto unknown = write_config("[study]\nmode = solve\nM_list = 4\nspeed = fast\n");
  EXPECT_EQ(invoke({"--config", unknown.string()}), kExitConfig);
  EXPECT_NE(err_.str().find("study.speed"), std::string::npos);
  const auto cfg = write_config(kSmallConvergence);
  EXPECT_EQ(invoke({"--config", cfg.string(), "--mode", "sprint"}), kExitConfig);
  // solve mode with two meshes
  EXPECT_EQ(invoke({"--config", cfg.string(), "--mode", "solve"}), kExitConfig);
}

TEST_F(CliTest, ParseAndValidate) {
  std::istringstream in(R"([study]
mode = stability
r = 1
M_list = 8, 16
tau = 1/10, 0.05
T = 1
p_list = 2, 6

[problem]
example = custom
solution = zero
advection = true
b = 1, -1
)");
  const StudyConfig c = parse_study_config(in);
  EXPECT_EQ(c.mode, StudyMode::stability);
  EXPECT_EQ(c.tau_rule, TauRule::fixed);
  ASSERT_EQ(c.tau_values.size(), 2u);
  EXPECT_DOUBLE_EQ(c.tau_values[0], 0.1);
  EXPECT_TRUE(c.nonlinearity.advection);
  EXPECT_EQ(c.nonlinearity.b.size(), 2);
  EXPECT_NO_THROW(validate(c));
  const auto runs = expand_runs(c);
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(runs[1].M, 16);
  EXPECT_DOUBLE_EQ(runs[2].tau, 0.05);

  StudyConfig bad = c;
  bad.M_list = {8, 12};
  bad.mode = StudyMode::convergence;
  bad.tau_values = {0.1};
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.tau_values = {0.3};
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.p_list = {5};
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.dim = 3;
  EXPECT_THROW(validate(bad), ConfigError);

  std::istringstream not_custom("[study]\nM_list = 4\n[problem]\nexample = allen_cahn_2d\ncubic = false\n");
  EXPECT_THROW(parse_study_config(not_custom), ConfigError);
}

TEST_F(CliTest, CoupledTimeStep) {
  std::istringstream in("[study]\nmode = convergence\nr = 1\nM_list = 2, 4\n[problem]\nexample = allen_cahn_2d\n");
  const StudyConfig c = parse_study_config(in);
  const auto runs = expand_runs(c);
  EXPECT_DOUBLE_EQ(runs[0].tau, 0.25);
  EXPECT_DOUBLE_EQ(runs[1].tau, 1.0 / 16);
}

TEST_F(CliTest, StabilityOrdersStayWithinTauGroups) {
  const auto cfg = write_config(R"([study]
mode = stability
r = 0
M_list = 2, 4
tau = 0.5, 0.25
T = 1
timing = true

[problem]
example = allen_cahn_2d
)");
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", "-"}), kExitOk) << err_.str();
  const auto rows = lines(out_.str());
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_TRUE(fields(rows[1])[5].empty());
  EXPECT_FALSE(fields(rows[2])[5].empty());
  EXPECT_TRUE(fields(rows[3])[5].empty());
  EXPECT_FALSE(fields(rows[4])[5].empty());
  EXPECT_FALSE(fields(rows[4])[12].empty());
}

TEST_F(CliTest, SolveWritesSnapshotsAndSummary) {
  const fs::path out = dir_ / "solve.csv";
  const auto cfg = write_config("[study]\nmode = solve\nr = 1\nM_list = 4\ntau = 0.25\nT = 1\nvtk_stride = 2\noutput = " +
                                out.string() + "\n[problem]\nexample = allen_cahn_2d\n");
  ASSERT_EQ(invoke({"--config", cfg.string()}), kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(out));
  int vtk = 0;
  for (const auto& e : fs::directory_iterator(dir_)) vtk += e.path().extension() == ".vtk";
  EXPECT_EQ(vtk, 3);  // steps 0, 2 and 4
  EXPECT_NE(err_.str().find("steps=4"), std::string::npos);
}

TEST_F(CliTest, EmbeddingModeReportsChain) {
  const auto cfg = write_config("[study]\nmode = embedding\nr = 0\nM_list = 2, 4\ntau = 0.5\nT = 1\n[problem]\nexample = allen_cahn_2d\n");
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", "-"}), kExitOk) << err_.str();
  EXPECT_EQ(lines(err_.str()).size(), 2u);
  EXPECT_NE(err_.str().find("slack="), std::string::npos);
}

TEST_F(CliTest, NumericalFailureExitCode) {
  // exp(t) in the manufactured source overflows the cubic term
  const auto cfg = write_config("[study]\nmode = solve\nr = 0\nM_list = 2\ntau = 100\nT = 400\n[problem]\nexample = allen_cahn_2d\n");
  EXPECT_EQ(invoke({"--config", cfg.string(), "--out", "-"}), kExitNumerical);
  EXPECT_NE(err_.str().find("numerical failure"), std::string::npos);
}

TEST_F(CliTest, ModeNames) {
  for (auto m : {StudyMode::solve, StudyMode::convergence, StudyMode::stability, StudyMode::embedding}) {
    EXPECT_EQ(parse_mode(mode_name(m)), m);
  }
  EXPECT_FALSE(parse_mode("fast").has_value());
}
