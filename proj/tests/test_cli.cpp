#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "heston/commands.hpp"
#include "heston/manifest.hpp"
#include "support.hpp"

using namespace heston;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "heston-degen");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("heston_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  const std::string s = slurp(p);
  return s.substr(0, s.find('\n'));
}

std::string cfg(const std::string& name) { return heston::testing::config_path(name); }

}  // namespace

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(cli({"validate", "--config", cfg("set1.cfg")}).code, 0);
  const CliRun bad = cli({"validate", "--config", cfg("bad_feller.cfg")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("admissible 0"), std::string::npos);
  EXPECT_EQ(cli({"validate", "--config", "/does/not/exist.cfg"}).code, 2);
  EXPECT_EQ(cli({"validate"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate", "--config", cfg("set1.cfg")}).code, 2);
}

TEST(Cli, ConfigErrorReportsLine) {
  const fs::path dir = scratch("badcfg");
  fs::create_directories(dir);
  std::ofstream(dir / "x.cfg") << "[model]\nsigma = 0.3\nwhat = 2\n";
  const CliRun r = cli({"validate", "--config", (dir / "x.cfg").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, PriceWritesManifestedOutputs) {
  const fs::path dir = scratch("price");
  const CliRun r = cli({"price", "--config", cfg("quick.cfg"), "--method", "pde,cf", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"price.csv", "comparison.csv", "surface_t0.csv", "boundary.csv", "norms.csv",
                        "operator_triplets.txt", "run_manifest.txt", "manifest.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  // Every file except the manifest itself is listed with its checksum and size.
  std::istringstream man(slurp(dir / "manifest.txt"));
  std::string name, crc;
  std::size_t bytes, listed = 0;
  while (man >> name >> crc >> bytes) {
    EXPECT_EQ(crc, checksum_hex(slurp(dir / name))) << name;
    EXPECT_EQ(bytes, fs::file_size(dir / name)) << name;
    ++listed;
  }
  std::size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(dir)) on_disk += e.path().filename() != "manifest.txt";
  EXPECT_EQ(listed, on_disk);
  EXPECT_EQ(first_line(dir / "price.csv"), "method,x,xi,price,half_width,runtime_ms");
}

TEST(Cli, PriceRejectsBadMethodAndOutsidePoint) {
  EXPECT_EQ(cli({"price", "--config", cfg("quick.cfg"), "--method", "magic", "--out", scratch("m").string()}).code, 2);
  const fs::path dir = scratch("pt");
  fs::create_directories(dir);
  std::string text = slurp(cfg("quick.cfg"));
  text.replace(text.find("points = "), 9, "points = 9 0.1; ");
  std::ofstream(dir / "far.cfg") << text;
  const CliRun r = cli({"price", "--config", (dir / "far.cfg").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, RerunsAreByteIdentical) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b})
    ASSERT_EQ(cli({"price", "--config", cfg("quick.cfg"), "--method", "all", "--out", d.string()}).code, 0);
  EXPECT_EQ(slurp(a / "manifest.txt"), slurp(b / "manifest.txt"));
  EXPECT_EQ(slurp(a / "price.csv"), slurp(b / "price.csv"));
}

TEST(Cli, SeedOverrideChangesMonteCarloOnly) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  ASSERT_EQ(cli({"price", "--config", cfg("quick.cfg"), "--method", "mc", "--out", a.string()}).code, 0);
  ASSERT_EQ(cli({"price", "--config", cfg("quick.cfg"), "--method", "mc", "--seed", "7", "--out", b.string()}).code, 0);
  EXPECT_NE(slurp(a / "price.csv"), slurp(b / "price.csv"));
  EXPECT_NE(slurp(b / "run_manifest.txt").find("seed 7"), std::string::npos);
}

TEST(Cli, VerifySuites) {
  EXPECT_EQ(cli({"verify", "--suite", "nonsense", "--config", cfg("quick.cfg"), "--out", scratch("v0").string()}).code, 2);
  const fs::path dir = scratch("v1");
  const CliRun r = cli({"verify", "--suite", "maxprinciple", "--config", cfg("quick.cfg"), "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_TRUE(fs::exists(dir / "verdict_maxprinciple.csv"));
  EXPECT_NE(r.out.find("PASS maxprinciple"), std::string::npos);
  EXPECT_EQ(first_line(dir / "verdict_maxprinciple.csv"), "check,pass,worst_margin,worst_location");
}

TEST(Cli, ConvergeNeedsThreeLevels) {
  EXPECT_EQ(cli({"converge", "--config", cfg("quick.cfg"), "--levels", "2", "--out", scratch("c").string()}).code, 2);
}

TEST(Cli, TimingIsOptIn) {
  const fs::path dir = scratch("timing");
  ASSERT_EQ(cli({"price", "--config", cfg("quick.cfg"), "--method", "cf", "--timing", "--out", dir.string()}).code, 0);
  EXPECT_NE(slurp(dir / "run_manifest.txt").find("wall_ms"), std::string::npos);
  EXPECT_EQ(slurp(dir / "price.csv").find(",-\n"), std::string::npos);
}

TEST(Convergence, OrdersOnQuickGrid) {
  RunConfig c = heston::testing::pinned_config("quick");
  c.grid.nx = 80;
  c.grid.n_xi = 48;
  const ConvergenceResult r = run_convergence(c, 3);
  EXPECT_EQ(r.rows.size(), 9u);
  EXPECT_GE(r.ie_order, 0.8);
  EXPECT_LE(r.ie_order, 1.2);
  EXPECT_GE(r.cn_order, 1.6);
  EXPECT_LE(r.cn_order, 2.2);
  EXPECT_GE(r.space_order, 1.5);
}
