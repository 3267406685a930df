#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "expander/checkpoint.hpp"
#include "expander/matrix_io.hpp"
#include "expander/recurrent.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(EXPANDER_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("expander_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSmallConfig =
    "[model]\ncell = rnn\nhidden = 6\n"
    "[data]\nsource = synth\nkind = mean_threshold\nsamples = 120\nsteps = 4\ninput_size = 3\n"
    "[train]\nepochs = 1\nbatch_size = 12\nseed = 5\n"
    "[prune]\nrounds = 4\nfinal_fraction = 0.1\nfinetune_epochs = 1\n";

// Every error line must start with a machine-readable code.
bool has_error_prefix(const std::string& out, const std::string& code) {
  return std::regex_search(out, std::regex("(^|\\n)" + code + ": "));
}

}  // namespace

TEST(Cli, AnalyzeIdentityMatrix) {
  fs::path dir = temp_dir("analyze");
  expander::save_matx(dir / "i.matx", expander::DenseMatrix::identity(4));
  CliRun r = cli("analyze " + (dir / "i.matx").string() + " --mode weighted");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("\"lambda1\": 1.0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"lambda2\": 1.0"), std::string::npos);
  EXPECT_NE(r.out.find("\"delta_S\": -1.0"), std::string::npos);
}

TEST(Cli, AnalyzeCheckpointReportsEveryLayerAndMode) {
  fs::path dir = temp_dir("analyze_ck");
  expander::Checkpoint ck{expander::init_params(8, 16, 2, expander::CellKind::rnn, 1), {}};
  ck.mask = expander::full_mask(ck.params);
  expander::save_checkpoint(dir / "a.rprm", ck);
  CliRun r = cli("analyze " + (dir / "a.rprm").string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '{'), 1 + 4);
}

TEST(Cli, ErrorExitCodesAndPrefixes) {
  fs::path dir = temp_dir("errors");
  CliRun missing = cli("analyze " + (dir / "nope.matx").string());
  EXPECT_EQ(missing.status, 2);
  EXPECT_TRUE(has_error_prefix(missing.out, "E_IO")) << missing.out;

  write(dir / "bad.matx", "matx 2 2\n1 2 3\n");
  CliRun bad = cli("analyze " + (dir / "bad.matx").string());
  EXPECT_EQ(bad.status, 3);
  EXPECT_TRUE(has_error_prefix(bad.out, "E_FORMAT"));

  write(dir / "asym.matx", "matx 2 2\n0 1\n0 0\n");
  CliRun refuse = cli("unroll " + (dir / "asym.matx").string() + " --k 2 --closed-form");
  EXPECT_EQ(refuse.status, 5);
  EXPECT_TRUE(has_error_prefix(refuse.out, "E_DOMAIN"));

  write(dir / "bad.cfg", "[model]\nhidden = 0\n[train]\nbatch_size = 0\n");
  CliRun cfg = cli("prune --config " + (dir / "bad.cfg").string());
  EXPECT_EQ(cfg.status, 4);
  EXPECT_TRUE(has_error_prefix(cfg.out, "E_CONFIG"));
  EXPECT_NE(cfg.out.find("model.hidden"), std::string::npos);
  EXPECT_NE(cfg.out.find("train.batch_size"), std::string::npos);

  CliRun usage = cli("unroll");
  EXPECT_EQ(usage.status, 64);
  EXPECT_TRUE(has_error_prefix(usage.out, "E_USAGE"));

  write(dir / "empty.jsonl", "");
  CliRun empty = cli("report " + (dir / "empty.jsonl").string());
  EXPECT_NE(empty.status, 0);
}

TEST(Cli, UnrollPrintsClosedFormAndDeviation) {
  fs::path dir = temp_dir("unroll");
  write(dir / "b.matx", "matx 2 2\n1 0.5\n0.5 2\n");
  CliRun r = cli("unroll " + (dir / "b.matx").string() + " --k 3 --closed-form");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("\"closed_form\""), std::string::npos);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("\"max_deviation\": ([0-9eE.+-]+)")));
  EXPECT_LT(std::stod(m[1]), 1e-9);
}

TEST(Cli, PruneResumeIsBitIdenticalAndReportWritesFiles) {
  fs::path dir = temp_dir("prune");
  write(dir / "c.cfg", kSmallConfig);
  const std::string cfg = (dir / "c.cfg").string();

  CliRun full = cli("prune --config " + cfg + " --out " + (dir / "full").string());
  ASSERT_EQ(full.status, 0) << full.out;
  CliRun part = cli("prune --config " + cfg + " --out " + (dir / "split").string() + " --stop-after-round 1");
  ASSERT_EQ(part.status, 0) << part.out;
  CliRun rest = cli("prune --config " + cfg + " --out " + (dir / "split").string());
  ASSERT_EQ(rest.status, 0) << rest.out;
  EXPECT_NE(rest.out.find("rounds resumed from disk: 2"), std::string::npos) << rest.out;

  const std::string a = slurp(dir / "full" / "trajectory.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "split" / "trajectory.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "full" / "checkpoints" / "round_004.rprm"));
  EXPECT_TRUE(fs::exists(dir / "full" / "summary.txt"));

  CliRun rep = cli("report " + (dir / "full" / "trajectory.jsonl").string() + " --out " +
                (dir / "fig.svg").string());
  ASSERT_EQ(rep.status, 0) << rep.out;
  EXPECT_TRUE(fs::exists(dir / "fig.svg"));
  EXPECT_TRUE(fs::exists(dir / "fig.csv"));

  // A changed config must not silently resume into an existing directory.
  std::string changed = kSmallConfig;
  changed.replace(changed.find("hidden = 6"), 10, "hidden = 7");
  write(dir / "e.cfg", changed);
  CliRun clash = cli("prune --config " + (dir / "e.cfg").string() + " --out " + (dir / "full").string());
  EXPECT_EQ(clash.status, 4) << clash.out;
}

TEST(Cli, TrainWritesDenseCheckpoint) {
  fs::path dir = temp_dir("train");
  write(dir / "c.cfg", kSmallConfig);
  CliRun r = cli("train --config " + (dir / "c.cfg").string() + " --out " + (dir / "o").string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(expander::is_checkpoint_file(dir / "o" / "dense.rprm"));
}
