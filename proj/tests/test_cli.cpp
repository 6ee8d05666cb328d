#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(COULOMB_LAB_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("coulomb_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, HelpAndMissingSubcommand) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("no-such-command"), 2);
}

TEST(Cli, MissingRequiredKeyIsConfigError) {
  const fs::path dir = scratch("missing");
  EXPECT_EQ(run("equilibrium --beta 2 --out " + dir.string()), 2);
  EXPECT_EQ(run("sample --n 8 --beta 2 --dim 4 --out " + dir.string()), 2);
}

TEST(Cli, UnknownConfigKeyIsConfigError) {
  const fs::path dir = scratch("unknown");
  std::ofstream(dir / "run.cfg") << "n = 8\nbeta = 2\nbogus = 1\n";
  EXPECT_EQ(run("equilibrium --config-file " + (dir / "run.cfg").string() + " --out " + dir.string()), 2);
}

TEST(Cli, EquilibriumWritesGrid) {
  const fs::path dir = scratch("eq");
  ASSERT_EQ(run("equilibrium --n 16 --beta 2 --grid-n 64 --out " + (dir / "mu.grid").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "mu.grid"));
  EXPECT_GT(fs::file_size(dir / "mu.grid"), 64u * 64u * 8u);
}

TEST(Cli, SameSeedSameBytes) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  const std::string args = "sample --n 12 --beta 2 --samples 20 --sweeps 200 --burnin 50 --thin 10 --seed 5 --out ";
  ASSERT_EQ(run(args + (a / "s.csv").string()), 0);
  ASSERT_EQ(run(args + (b / "s.csv").string()), 0);
  const std::string sa = slurp(a / "s.csv");
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, slurp(b / "s.csv"));
}

TEST(Cli, OutsideBulkIsRejected) {
  const fs::path dir = scratch("bulk");
  EXPECT_EQ(run("clt-pipeline --n 64 --beta 2 --sampler ginibre --samples 10 --xi bump:0.6,0,0.3,4 --out " +
                dir.string()),
            2);
}

TEST(Cli, EnergyCheckSplittingPasses) {
  const fs::path dir = scratch("energy");
  EXPECT_EQ(run("energy-check --n 64 --beta 8 --grid-n 256 --configs 3 --out " + (dir / "e.csv").string()), 0);
  const std::string csv = slurp(dir / "e.csv");
  EXPECT_NE(csv.find("splitting"), std::string::npos);
}
