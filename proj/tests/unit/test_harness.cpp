#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwspeed/errors.hpp"
#include "gwspeed/harness.hpp"
#include "harness/output.hpp"

using namespace gwspeed;
namespace fs = std::filesystem;

namespace {

Config from_text(const std::string& s) {
  std::istringstream in(s);
  return Config::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gwspeed-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config sections, lists and distributions") {
  const Config c = from_text(
      "seed = 9\n[compare]\np1 = 1:0.25, 2:0.75\nbetas = 2, 6.5\nblocks = 1e4\nflag = yes\n# comment\n");
  CHECK(c.text("run.seed") == "9");
  CHECK(c.reals("compare.betas") == std::vector<double>{2, 6.5});
  CHECK(c.count("compare.blocks", 1) == 10000);
  CHECK(c.flag("compare.flag", false));
  CHECK(c.dist("compare.p1").literal() == "1:0.25,2:0.75");
  CHECK(c.real("compare.missing", 3.5) == 3.5);
  CHECK(from_text("x = 23/4\n").real("run.x") == 5.75);
  CHECK_THROWS_AS(from_text("x = 1/0\n").real("run.x"), ConfigError);
  CHECK_THROWS_AS(c.real("compare.p1"), ConfigError);
  CHECK_THROWS_AS(c.text("compare.nope"), ConfigError);
}

TEST_CASE("unused keys are rejected") {
  const Config c = from_text("[speed]\ndist = 2:1\ntypo = 3\n[compare]\nbetas = 2\n");
  c.dist("speed.dist");
  CHECK_THROWS_AS(c.reject_unused({"compare"}), ConfigError);
  c.text("speed.typo");
  CHECK_NOTHROW(c.reject_unused({"compare"}));
}

TEST_CASE("CSV quoting and number formatting") {
  const fs::path dir = scratch("csv");
  harness::CsvTable t({"a", "b"});
  t.add({"1:0.5,2:0.5", harness::num(0.1)});
  CHECK_THROWS_AS(t.add({"x"}), StateCorrupt);
  t.write(dir / "t.csv");
  CHECK(slurp(dir / "t.csv") == "a,b\n\"1:0.5,2:0.5\",0.10000000000000001\n");
  CHECK(harness::num(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("sha256 of a known string") {
  const fs::path dir = scratch("sha");
  std::ofstream(dir / "abc", std::ios::binary) << "abc";
  CHECK(sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("runs are reproducible and worker-count invariant") {
  const fs::path dir = scratch("run");
  const Config c = from_text(
      "[run]\nseed = 42\n[regen-stats]\np1 = 1:0.25,2:0.25,3:0.25,4:0.25\np2 = 1:0.5,2:0.5\n"
      "betas = 6, 8\nblocks = 4000\ntask_blocks = 1000\n");
  std::ostringstream log;
  const RunResult a = run_experiment("regen-stats", c, {std::nullopt, 1, dir / "a"}, log);
  const RunResult b = run_experiment("regen-stats", c, {std::nullopt, 1, dir / "b"}, log);
  const RunResult w = run_experiment("regen-stats", c, {std::nullopt, 4, dir / "w"}, log);
  REQUIRE(a.exit_code == 0);
  for (const char* f : {"regen_stats.csv", "tail_B.csv", "summary.json", "tail_B.svg"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "w" / f));
  }
  // Summary row counts match the CSV bodies.
  std::ifstream in(dir / "a" / "tail_B.csv");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(a.summary["files"]["tail_B.csv"]["rows"] == lines - 1);
  CHECK(a.manifest["complete"] == true);
  CHECK(a.manifest["task_seeds"].size() == 2);
  CHECK(a.manifest["outputs"].size() == 4);
}

TEST_CASE("seed and kind errors map to exit codes") {
  const fs::path dir = scratch("errors");
  std::ostringstream log;
  const Config no_seed = from_text("[compare]\np1 = 3:1\np2 = 2:1\nbetas = 6\n");
  CHECK(run_experiment("compare", no_seed, {std::nullopt, std::nullopt, dir / "a"}, log).exit_code == 2);
  CHECK(run_experiment("compare", no_seed, {7, std::nullopt, dir / "b"}, log).exit_code == 0);
  const Config low = from_text("[run]\nseed = 1\n[compare]\np1 = 3:1\np2 = 2:1\nbetas = 1\n");
  CHECK(run_experiment("compare", low, {std::nullopt, std::nullopt, dir / "d"}, log).exit_code == 2);
  const Config audit = from_text("[run]\nseed = 1\n[coupling-audit]\nzmax = 5\nbetas = 1.5\ntol = 1e-30\n");
  const RunResult r = run_experiment("coupling-audit", audit, {std::nullopt, std::nullopt, dir / "c"}, log);
  CHECK(r.exit_code == 3);
  CHECK(r.manifest["complete"] == false);
}
