#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ppconv/io.hpp"
#include "ppconv/thinning.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("ppconv_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  int run(const std::string& args) const {
    const std::string cmd =
        std::string(PPCONV_CLI_PATH) + " " + args + " >" + path("stdout.txt").string() + " 2>" + path("stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  std::string stderr_text() const { return slurp(path("stderr.txt")); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // Every file of a run except the manifest, which carries wall-clock time.
  static std::map<std::string, std::string> data_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().filename() != "manifest.json") out[e.path().filename().string()] = slurp(e.path());
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, MeanfieldZeroHorizonGivesEmptyOutputsAndManifest) {
  write("mf.cfg", "model=meanfield\nN=10\nT=0\nn_obs=2\n");
  ASSERT_EQ(run("simulate --config " + path("mf.cfg").string() + " --out " + path("o").string()), 0)
      << stderr_text();
  for (const char* f : {"state.csv", "intensity.csv", "counting_1.csv", "counting_2.csv", "window_1.csv",
                        "window_2.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(path("o") / f)) << f;
  std::ifstream w(path("o") / "window_1.csv");
  EXPECT_TRUE(ppconv::read_window_csv(w).empty());
  std::ifstream c(path("o") / "counting_1.csv");
  EXPECT_EQ(std::get<ppconv::StepPath>(ppconv::read_path_csv(c)).jump_count(), 0u);
  const json m = json::parse(slurp(path("o") / "manifest.json"));
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_EQ(m["config"]["T"], "0");
  EXPECT_EQ(m["master_seed"], 20240611u);
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
  EXPECT_TRUE(m.contains("version"));
}

TEST_F(Cli, RepeatedSimulationIsByteIdentical) {
  write("h.cfg", "model=hawkes\nN=64\nT=3\nn_obs=3\n");
  write("m.cfg", "model=meanfield\nN=32\nT=1\nn_obs=2\n");
  write("v.cfg", "model=volterra\nN=8\nT=1\ngamma=0.5\n");
  for (const char* cfg : {"h.cfg", "m.cfg", "v.cfg"}) {
    const std::string base = "simulate --config " + path(cfg).string() + " --seed 7 --out ";
    ASSERT_EQ(run(base + path("a").string()), 0) << stderr_text();
    ASSERT_EQ(run(base + path("b").string()), 0) << stderr_text();
    const auto a = data_files(path("a"));
    EXPECT_GT(a.size(), 3u);
    EXPECT_EQ(a, data_files(path("b"))) << cfg;
    fs::remove_all(path("a"));
    fs::remove_all(path("b"));
  }
}

TEST_F(Cli, SeedChangesOutput) {
  write("h.cfg", "model=hawkes\nN=64\nT=3\n");
  ASSERT_EQ(run("simulate --config " + path("h.cfg").string() + " --seed 1 --out " + path("a").string()), 0);
  ASSERT_EQ(run("simulate --config " + path("h.cfg").string() + " --seed 2 --out " + path("b").string()), 0);
  EXPECT_NE(slurp(path("a") / "window_1.csv"), slurp(path("b") / "window_1.csv"));
}

TEST_F(Cli, ConstantRateHawkesCountingFilesCoincide) {
  write("h.cfg", "model=hawkes\nf=const:1.5\nN=40\nT=4\nn_obs=2\n");
  ASSERT_EQ(run("simulate --config " + path("h.cfg").string() + " --out " + path("o").string()), 0);
  for (const char* i : {"1", "2"})
    EXPECT_EQ(slurp(path("o") / ("counting_" + std::string(i) + ".csv")),
              slurp(path("o") / ("limit_counting_" + std::string(i) + ".csv")));
}

TEST_F(Cli, WrittenFilesRoundTripExactly) {
  write("m.cfg", "model=meanfield\nN=16\nT=1\n");
  ASSERT_EQ(run("simulate --config " + path("m.cfg").string() + " --out " + path("o").string()), 0);
  for (const char* f : {"state.csv", "intensity.csv", "counting_1.csv", "limit_state.csv"}) {
    const std::string text = slurp(path("o") / f);
    std::stringstream in(text);
    std::stringstream again;
    ppconv::write_path_csv(again, ppconv::read_path_csv(in));
    EXPECT_EQ(again.str(), text) << f;
  }
  const std::string text = slurp(path("o") / "window_1.csv");
  std::stringstream in(text);
  std::stringstream again;
  ppconv::write_window_csv(again, ppconv::read_window_csv(in));
  EXPECT_EQ(again.str(), text);
}

TEST_F(Cli, RateExperimentIsIndependentOfJobs) {
  write("h.cfg", "model=hawkes\nT=2\n");
  const std::string base = "converge --config " + path("h.cfg").string() + " --n-list 4,8,16 --replicates 10 ";
  ASSERT_EQ(run(base + "--jobs 1 --out " + path("a").string()), 0) << stderr_text();
  ASSERT_EQ(run(base + "--jobs 3 --out " + path("b").string()), 0) << stderr_text();
  EXPECT_EQ(data_files(path("a")), data_files(path("b")));
  const std::string csv = slurp(path("a") / "rate_curve.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,mean_error,std_error,replicates");
  const json fit = json::parse(slurp(path("a") / "rate_fit.json"));
  EXPECT_TRUE(fit.contains("slope"));
  EXPECT_EQ(fit["replicates"], 10);
  EXPECT_EQ(fit["n_list"], (std::vector<int>{4, 8, 16}));
}

TEST_F(Cli, FlagsOverrideConfigKeys) {
  write("h.cfg", "model=hawkes\nT=5\nseed=5\nn_list=2,3,4\nreplicates=5\n");
  ASSERT_EQ(run("converge --config " + path("h.cfg").string() + " --seed 9 --replicates 6 --out " +
                path("o").string()),
            0);
  const json m = json::parse(slurp(path("o") / "manifest.json"));
  EXPECT_EQ(m["master_seed"], 9);
  EXPECT_EQ(m["config"]["replicates"], "6");
  const json fit = json::parse(slurp(path("o") / "rate_fit.json"));
  EXPECT_EQ(fit["replicates"], 6);
  EXPECT_EQ(fit["seed"], 9);
}

TEST_F(Cli, MarginalExperimentWritesReport) {
  write("m.cfg", "model=meanfield\nT=1\nexperiment=marginal\n");
  ASSERT_EQ(run("converge --config " + path("m.cfg").string() + " --n-list 2,8 --replicates 60 --times 0.5,1 --out " +
                path("o").string()),
            0)
      << stderr_text();
  std::istringstream csv(slurp(path("o") / "marginal_report.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "N,t,ks,wasserstein");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 4);
  const json s = json::parse(slurp(path("o") / "marginal_summary.json"));
  EXPECT_EQ(s["null_ks"].size(), 2u);
  EXPECT_GT(s["band_99"].get<double>(), 0.0);
}

TEST_F(Cli, EmptyNListIsValidationError) {
  write("h.cfg", "model=hawkes\n");
  EXPECT_EQ(run("converge --config " + path("h.cfg").string() + " --n-list \"\" --out " + path("o").string()), 1);
  EXPECT_NE(stderr_text().find("N list is empty"), std::string::npos) << stderr_text();
}

TEST_F(Cli, ConfigErrorsNameLineAndKey) {
  write("a.cfg", "model=hawkes\nN 16\n");
  EXPECT_EQ(run("simulate --config " + path("a.cfg").string() + " --out " + path("o").string()), 1);
  EXPECT_NE(stderr_text().find("a.cfg:2"), std::string::npos) << stderr_text();
  write("b.cfg", "model=hawkes\nT=five\n");
  EXPECT_EQ(run("simulate --config " + path("b.cfg").string() + " --out " + path("o").string()), 1);
  EXPECT_NE(stderr_text().find("'T'"), std::string::npos) << stderr_text();
  write("c.cfg", "model=hawkes\nalpha=1\n");
  EXPECT_EQ(run("simulate --config " + path("c.cfg").string() + " --out " + path("o").string()), 1);
  EXPECT_NE(stderr_text().find("alpha"), std::string::npos) << stderr_text();
  write("d.cfg", "model=ising\n");
  EXPECT_EQ(run("simulate --config " + path("d.cfg").string() + " --out " + path("o").string()), 1);
  EXPECT_EQ(run("simulate --config " + path("missing.cfg").string() + " --out " + path("o").string()), 1);
  EXPECT_EQ(run("simulate --bogus-flag"), 1);
}

TEST_F(Cli, ModelRuntimeErrorExitsTwo) {
  write("h.cfg", "model=hawkes\nf=const:2\nmax_bound=1\n");
  EXPECT_EQ(run("simulate --config " + path("h.cfg").string() + " --out " + path("o").string()), 2);
  EXPECT_NE(stderr_text().find("bound_overflow"), std::string::npos) << stderr_text();
  write("c.cfg", "model=hawkes\nf=const:1\nT=2\n");
  EXPECT_EQ(run("converge --config " + path("c.cfg").string() + " --n-list 4,8,16 --replicates 4 --out " +
                path("r").string()),
            2);
  EXPECT_NE(stderr_text().find("degenerate_fit"), std::string::npos) << stderr_text();
}

TEST_F(Cli, CounterexampleReport) {
  ASSERT_EQ(run("counterexample --out " + path("o").string()), 0) << stderr_text();
  const json r = json::parse(slurp(path("o") / "report.json"));
  EXPECT_EQ(r["phi_x"]["jump_count"], 1);
  EXPECT_EQ(r["phi_x"]["jump_times"][0], 1.0);
  for (const char* n : {"1", "2", "4", "8", "16"}) {
    EXPECT_EQ(r["phi_xn"][n]["jump_count"], 0) << n;
    EXPECT_TRUE(fs::exists(path("o") / ("x_n" + std::string(n) + ".csv")));
    EXPECT_TRUE(fs::exists(path("o") / ("phi_x_n" + std::string(n) + ".csv")));
  }
  EXPECT_FALSE(r["conditions"]["d"].get<bool>());
  EXPECT_EQ(r["conditions"]["violations_d"][0]["t"], 1.0);
  EXPECT_EQ(r["conditions"]["violations_d"][0]["z"], 1.0);
  EXPECT_TRUE(r["asserted"].get<bool>());
  std::ifstream x8(path("o") / "x_n8.csv");
  const auto p = std::get<ppconv::LinearPath>(ppconv::read_path_csv(x8));
  EXPECT_EQ(p.eval(1.0), 1.0 - 1.0 / 8.0);
  EXPECT_EQ(p.eval(0.25), 1.0);
}

TEST_F(Cli, PhiMatchesLibrary) {
  write("x.csv", "kind,step\nhorizon,3\nt,value\n0,1\n1,0.25\n2,2\n");
  write("w.csv", "# horizon=3,mark_bound=2\nt,z\n0.5,0.9\n1,1\n1.5,0.3\n2.5,1.9\n");
  ASSERT_EQ(run("phi --intensity " + path("x.csv").string() + " --window " + path("w.csv").string() + " --out " +
                path("o").string()),
            0)
      << stderr_text();
  std::ifstream c(path("o") / "counting_1.csv");
  const auto z = std::get<ppconv::StepPath>(ppconv::read_path_csv(c));
  EXPECT_EQ(z.jump_times(), (std::vector<double>{0.5, 1.0, 2.5}));
  const json cond = json::parse(slurp(path("o") / "conditions.json"));
  EXPECT_FALSE(cond["c"].get<bool>());
  EXPECT_FALSE(cond["d"].get<bool>());
  EXPECT_EQ(cond["violations_d"][0]["t"], 1.0);
}

TEST_F(Cli, PhiRejectsNonSimpleWindow) {
  write("x.csv", "kind,step\nhorizon,3\nt,value\n0,1\n");
  write("w.csv", "t,z\n1,0.5\n1,0.7\n");
  EXPECT_EQ(run("phi --intensity " + path("x.csv").string() + " --window " + path("w.csv").string() + " --out " +
                path("o").string()),
            1);
  EXPECT_NE(stderr_text().find("non_simple"), std::string::npos) << stderr_text();
}

TEST_F(Cli, SelftestQuickPassesWithJsonReport) {
  ASSERT_EQ(run("selftest --level quick --out " + path("o").string()), 0) << stderr_text();
  const json j = json::parse(slurp(path("o") / "selftest.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  ASSERT_GT(j["invariants"].size(), 10u);
  for (const auto& e : j["invariants"]) {
    EXPECT_TRUE(e.contains("name"));
    EXPECT_TRUE(e["passed"].get<bool>()) << e["name"];
  }
  EXPECT_EQ(json::parse(slurp(path("stdout.txt"))), j);
}
