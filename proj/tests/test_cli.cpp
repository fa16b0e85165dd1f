#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "fides/cli/commands.hpp"
#include "fides/cli/config.hpp"
#include "fides/errors.hpp"

using namespace fides;
using namespace fides::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fides_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config text: both separators, comments and validation") {
  const auto c = parse_config_text("# run settings\ncase = C5\niters: 250\nnoise-std = 0.05  # inline\n"
                                   "schedule = 0:1e-2, 100:1e-3\nvalues = 16,32\n\n");
  CHECK(*c.case_id == "C5");
  CHECK(*c.iters == 250);
  CHECK(*c.noise_std == 0.05);
  REQUIRE(c.schedule->size() == 2);
  CHECK((*c.schedule)[1].start_iter == 100);
  CHECK(*c.values == std::vector<int>{16, 32});
  CHECK_THROWS_AS(parse_config_text("bogus = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("iters = ten"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just words"), ConfigError);
}

TEST_CASE("merge lets later layers win field by field") {
  RunConfig a, b;
  a.iters = 10;
  a.seed = 3;
  b.iters = 20;
  const auto m = merge(a, b);
  CHECK(*m.iters == 20);
  CHECK(*m.seed == 3);
}

TEST_CASE("precedence: case defaults < config file < flags") {
  const fs::path dir = scratch("precedence");
  {
    std::ofstream(dir / "cfg.txt") << "case = C5\niters = 7\nseed = 9\n";
  }
  auto r = run({"run", "--config", (dir / "cfg.txt").string(), "--out", (dir / "a").string()});
  CHECK(r.code == kExitOk);
  CHECK(slurp(dir / "a" / "report.txt").find("iterations_run: 7") != std::string::npos);
  CHECK(slurp(dir / "a" / "report.txt").find("seed: 9") != std::string::npos);
  r = run({"run", "--config", (dir / "cfg.txt").string(), "--iters", "4", "--out", (dir / "b").string()});
  CHECK(slurp(dir / "b" / "report.txt").find("iterations_run: 4") != std::string::npos);
}

TEST_CASE("run writes the three artifacts with fixed headers") {
  const fs::path dir = scratch("run");
  const auto r = run({"run", "--case", "C7", "--iters", "30", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("mse: ") != std::string::npos);
  CHECK(r.out.find("rel_l2: ") != std::string::npos);
  const std::string sol = slurp(dir / "solution.csv");
  CHECK(sol.rfind("x,u1_pred,u2_pred,u1_exact,u2_exact,u1_sq_err,u2_sq_err\n", 0) == 0);
  CHECK(lines(sol) == 66);
  CHECK(slurp(dir / "loss.csv").rfind("iteration,phi\n", 0) == 0);
  CHECK(lines(slurp(dir / "loss.csv")) == 31);
}

TEST_CASE("usage errors exit non-zero") {
  auto r = run({"run", "--case", "C9"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("C7\t1\t2") != std::string::npos);  // catalog printed
  CHECK(run({"inverse", "--noise-std", "-0.1", "--iters", "1", "--out", scratch("neg").string()}).code == kExitUsage);
  CHECK(run({"run"}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"run", "--case", "C5", "--n", "1"}).code == kExitUsage);
  CHECK(run({"sweep-n", "--case", "C5", "--values", "16,1"}).code == kExitUsage);
  CHECK(run({"sensitivity", "--case", "C5", "--vary", "layers", "--values", ""}).code == kExitUsage);
  CHECK(run({"sensitivity", "--case", "C5", "--vary", "depth", "--values", "3"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("identical commands produce byte-identical CSVs") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const auto& d : {a, b}) {
    CHECK(run({"run", "--case", "C4", "--iters", "120", "--seed", "5", "--out", d.string()}).code == kExitOk);
  }
  CHECK(slurp(a / "solution.csv") == slurp(b / "solution.csv"));
  CHECK(slurp(a / "loss.csv") == slurp(b / "loss.csv"));
  CHECK_FALSE(slurp(a / "loss.csv").empty());
}

TEST_CASE("sweep and sensitivity tables") {
  const fs::path s = scratch("sweep");
  auto r = run({"sweep-n", "--case", "C5", "--values", "16,32", "--iters", "50", "--out", s.string()});
  CHECK(r.code == kExitOk);
  const std::string table = slurp(s / "table.csv");
  CHECK(table.rfind("N,mse,rel_l2,iterations,stop_reason\n16,", 0) == 0);
  CHECK(lines(table) == 3);
  CHECK(slurp(s / "timing.csv").rfind("N,wall_seconds\n", 0) == 0);

  const fs::path one = scratch("single");
  r = run({"sensitivity", "--case", "C5", "--vary", "layers", "--values", "3", "--iters", "20", "--out", one.string()});
  CHECK(r.code == kExitOk);
  CHECK(slurp(one / "table.csv").rfind("layers,mse,rel_l2,iterations,stop_reason\n3,", 0) == 0);
  CHECK(lines(slurp(one / "table.csv")) == 2);
}

TEST_CASE("inverse prints recovered orders") {
  const fs::path d = scratch("inverse");
  const auto r = run({"inverse", "--case", "C7", "--iters", "40", "--noise-std", "0.1", "--out", d.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("alpha: ") != std::string::npos);
  CHECK(r.out.find("beta: ") != std::string::npos);
  const std::string rep = slurp(d / "report.txt");
  CHECK(rep.find("recovered_alpha: ") != std::string::npos);
  CHECK(rep.find("clamp_events: ") != std::string::npos);
}

TEST_CASE("list-cases prints the catalog") {
  const auto r = run({"list-cases"});
  CHECK(r.code == kExitOk);
  CHECK(lines(r.out) == 11);
}
