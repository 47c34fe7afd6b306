// Drives the icad binary end to end on tiny inputs.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "icad/persistence.hpp"

namespace fs = std::filesystem;
using namespace icad;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("icad_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of `icad <args>`; stdout and stderr go to <dir>/last.log.
  int run(const std::string& args) const {
    const std::string cmd = std::string(ICAD_CLI_PATH) + " " + args + " > " + p("last.log") + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string log() const { return slurp(p("last.log")); }

  static std::string slurp(const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Small data and both models, enough to exercise every subcommand.
  void build_models() {
    ASSERT_EQ(run("gen-data --out " + p("train.bin") + " --count 80 --dim 16 --seed 1"), 0) << log();
    ASSERT_EQ(run("gen-data --out " + p("cal.bin") + " --count 60 --dim 16 --seed 2"), 0) << log();
    ASSERT_EQ(run("gen-data --out " + p("ood.bin") + " --count 20 --dim 16 --r-min 60 --r-max 80 --seed 3"), 0);
    const std::string common = " --data " + p("train.bin") + " --epochs 2 --fine-tune-epochs 1 --widths 8 --seed 4";
    ASSERT_EQ(run("train-vae" + common + " --latent 2 --out " + p("vae.bin")), 0) << log();
    ASSERT_EQ(run("train-svdd" + common + " --out-dim 4 --pretrain --out " + p("svdd.bin")), 0) << log();
    ASSERT_EQ(run("calibrate --scorer vae --model " + p("vae.bin") + " --cal-data " + p("cal.bin") + " --out " +
                  p("vae.cal")), 0) << log();
    ASSERT_EQ(run("calibrate --scorer svdd --model " + p("svdd.bin") + " --cal-data " + p("cal.bin") + " --out " +
                  p("svdd.cal")), 0) << log();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenDataIsByteReproducible) {
  ASSERT_EQ(run("gen-data --out " + p("a.bin") + " --count 10 --dim 64 --seed 5"), 0) << log();
  ASSERT_EQ(run("gen-data --out " + p("b.bin") + " --count 10 --dim 64 --seed 5"), 0) << log();
  EXPECT_EQ(slurp(p("a.bin")), slurp(p("b.bin")));
  const auto d = io::load_dataset(p("a.bin"));
  EXPECT_EQ(d.examples.size(), 10u);
  EXPECT_EQ(d.examples[0].size(), 64u);
  EXPECT_TRUE(fs::exists(p("a.bin.cfg")));
  EXPECT_FALSE(fs::exists(p("a.bin.tmp")));
}

TEST_F(Cli, InvalidArgumentsExitWithOne) {
  EXPECT_EQ(run("gen-data --out " + p("a.bin") + " --count 0"), 1);
  EXPECT_NE(log().find("count"), std::string::npos) << log();
  EXPECT_EQ(run("gen-data --out " + p("a.bin") + " --dim 15"), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("detect --model x --cal y --input z --out w --N 0"), 1);
  EXPECT_NE(log().find("at least 1"), std::string::npos) << log();
  EXPECT_EQ(run("train-vae --data " + p("missing.bin") + " --out " + p("m.bin")), 1);
  EXPECT_NE(log().find("error:"), std::string::npos) << log();
}

TEST_F(Cli, TrainingWritesModelLossAndConfig) {
  build_models();
  EXPECT_NO_THROW(io::load_vae(p("vae.bin")));
  const auto svdd = io::load_svdd(p("svdd.bin"));
  EXPECT_TRUE(svdd.has_center());
  for (const auto* f : {"vae.bin.loss.csv", "vae.bin.cfg", "svdd.bin.loss.csv", "svdd.bin.pretrain.csv",
                        "svdd.bin.cfg", "vae.cal.cfg"})
    EXPECT_TRUE(fs::exists(p(f))) << f;
  // Two first-phase epochs plus one fine-tune epoch.
  const auto loss = slurp(p("vae.bin.loss.csv"));
  EXPECT_EQ(std::count(loss.begin(), loss.end(), '\n'), 4);
  const auto cfg = io::load_config(p("svdd.bin.cfg"));
  EXPECT_EQ(cfg.get("pretrain", std::string()), "true");
  EXPECT_EQ(cfg.get("out-dim", std::uint64_t{0}), 4u);
}

TEST_F(Cli, ConfigFileReproducesARun) {
  build_models();
  ASSERT_EQ(run("train-svdd --config " + p("svdd.bin.cfg") + " --out " + p("svdd2.bin")), 0) << log();
  EXPECT_EQ(slurp(p("svdd.bin")), slurp(p("svdd2.bin")));
  // Explicit flags win over the file.
  ASSERT_EQ(run("train-svdd --config " + p("svdd.bin.cfg") + " --out " + p("svdd3.bin") + " --seed 99"), 0);
  EXPECT_NE(slurp(p("svdd.bin")), slurp(p("svdd3.bin")));
}

TEST_F(Cli, CalibrationMismatchIsAnError) {
  build_models();
  EXPECT_EQ(run("detect --method svdd --model " + p("svdd.bin") + " --cal " + p("vae.cal") + " --input " +
                p("cal.bin") + " --out " + p("d.csv")),
            1);
  EXPECT_NE(log().find("fingerprint_mismatch"), std::string::npos) << log();
  EXPECT_EQ(run("detect --method vae --model " + p("svdd.bin") + " --cal " + p("svdd.cal") + " --input " +
                p("cal.bin") + " --out " + p("d.csv")),
            1);
}

TEST_F(Cli, DetectExitCodesAndDiagnostics) {
  build_models();
  const std::string base = "detect --method svdd --model " + p("svdd.bin") + " --cal " + p("svdd.cal") + " --N 3";
  EXPECT_EQ(run(base + " --input " + p("cal.bin") + " --out " + p("quiet.csv") + " --tau 1e9"), 0) << log();
  EXPECT_EQ(run(base + " --input " + p("ood.bin") + " --out " + p("loud.csv") + " --tau -1e9"), 2) << log();
  EXPECT_NE(log().find("alarm_step=0"), std::string::npos) << log();
  const auto csv = slurp(p("quiet.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,score,p,log_M,S,alarm");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 61);
  ASSERT_EQ(run("detect --method vae --model " + p("vae.bin") + " --cal " + p("vae.cal") + " --N 2 --input " +
                p("ood.bin") + " --out " + p("vae.csv") + " --tau 1e9"), 0) << log();
  const auto vcsv = slurp(p("vae.csv"));
  EXPECT_EQ(vcsv.substr(0, vcsv.find('\n')), "step,score,p_1,p_2,log_M,S,alarm");
  EXPECT_TRUE(fs::exists(p("vae.csv.cfg")));
}

TEST_F(Cli, DetectAndSimulateAreByteReproducible) {
  build_models();
  const std::string det = "detect --method vae --model " + p("vae.bin") + " --cal " + p("vae.cal") +
                          " --input " + p("ood.bin") + " --N 3 --seed 7 --delta 1 --tau 5 --out ";
  run(det + p("d1.csv"));
  run(det + p("d2.csv"));
  EXPECT_EQ(slurp(p("d1.csv")), slurp(p("d2.csv")));
  const std::string sim = "simulate --method svdd --model " + p("svdd.bin") + " --cal " + p("svdd.cal") +
                          " --episodes 4 --max-steps 40 --N 3 --tau 3 --seed 7 --out ";
  const int a = run(sim + p("s1"));
  const int b = run(sim + p("s2") + " --threads 3");
  EXPECT_EQ(a, b);
  for (const auto* f : {"episodes.csv", "metrics.csv", "episode_000.csv", "episode_003.csv"})
    EXPECT_EQ(slurp(p("s1") + "/" + f), slurp(p("s2") + "/" + f)) << f;
  EXPECT_TRUE(fs::exists(p("s1/run.cfg")));
  const auto metrics = slurp(p("s1/metrics.csv"));
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "method,N,delta,tau,false_positive,false_negative,average_delay");
}

TEST_F(Cli, SimulateWithInfiniteThresholdIsClean) {
  build_models();
  EXPECT_EQ(run("simulate --method vae --model " + p("vae.bin") + " --cal " + p("vae.cal") +
                " --episodes 2 --max-steps 60 --N 2 --tau inf --out " + p("s")),
            0)
      << log();
  const auto metrics = slurp(p("s/metrics.csv"));
  EXPECT_NE(metrics.find("0/1,1/1,n/a"), std::string::npos) << metrics;
  EXPECT_EQ(run("simulate --method vae --model " + p("vae.bin") + " --cal " + p("vae.cal") +
                " --episodes 2 --max-steps 20 --out " + p("s2")),
            1);
}

TEST_F(Cli, TuneWritesGridAndBest) {
  build_models();
  ASSERT_EQ(run("tune --method vae --model " + p("vae.bin") + " --cal " + p("vae.cal") +
                " --episodes 4 --max-steps 40 --N 2 --grid \"delta=0,1;tau=1:3:1\" --out " + p("t")),
            0)
      << log();
  const auto grid = slurp(p("t/grid.csv"));
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 1 + 2 * 3);
  EXPECT_TRUE(fs::exists(p("t/best.csv")));
  EXPECT_EQ(io::load_config(p("t/run.cfg")).get("command", std::string()), "tune");
  EXPECT_EQ(run("tune --method vae --model " + p("vae.bin") + " --cal " + p("vae.cal") +
                " --grid \"tau=3:1:1\" --out " + p("t2")),
            1);
}

TEST_F(Cli, BenchWritesOneRowPerWindow) {
  build_models();
  ASSERT_EQ(run("bench --method svdd --model " + p("svdd.bin") + " --cal " + p("svdd.cal") +
                " --N-list 1,2 --steps 5 --warmup 1 --out " + p("b.csv")),
            0)
      << log();
  const auto csv = slurp(p("b.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,N,min,Q1,Q2,Q3,max");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(Cli, BaselineScorersCalibrate) {
  build_models();
  EXPECT_EQ(run("calibrate --scorer knn --k 3 --train-data " + p("train.bin") + " --cal-data " + p("cal.bin") +
                " --out " + p("knn.cal")),
            0)
      << log();
  EXPECT_EQ(io::load_calibration(p("knn.cal")).size(), 60u);
  EXPECT_EQ(run("calibrate --scorer kde --bandwidth 0.5 --train-data " + p("train.bin") + " --cal-data " +
                p("cal.bin") + " --out " + p("kde.cal")),
            0)
      << log();
  EXPECT_EQ(run("calibrate --scorer kde --cal-data " + p("cal.bin") + " --out " + p("x.cal")), 1);
  EXPECT_EQ(run("calibrate --scorer kde --bandwidth 0 --train-data " + p("train.bin") + " --cal-data " +
                p("cal.bin") + " --out " + p("x.cal")),
            1);
}
