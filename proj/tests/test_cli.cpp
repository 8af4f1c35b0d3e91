#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ONEBIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(ONEBIT_CONFIG_DIR) + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("recover --method nonsense --config " + config("pair.json")) == 1);
  CHECK(run_cli("bench --builtin fig9") == 1);
  CHECK(run_cli("predict --config " + config("missing.json")) == 1);
  CHECK(run_cli("recover --config " + config("pair.json") + " frobs=1") == 1);
}

TEST_CASE("numerical failures exit 2") {
  CHECK(run_cli("recover --config " + config("pair.json") +
                " --method constant schedule.kind=\"constant\" schedule.value=5.0") == 2);
}

TEST_CASE("recover and predict write their outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "onebit_cli_test";
  std::filesystem::create_directories(dir);
  const auto out = dir / "pair.csv";
  REQUIRE(run_cli("recover --config " + config("pair.json") + " --method time_varying --out " +
                  out.string()) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("# M=2") != std::string::npos);
  const std::string meta = slurp(out.string() + ".json");
  CHECK(meta.find("\"converged\"") != std::string::npos);

  const auto pred = dir / "pred.json";
  REQUIRE(run_cli("predict --config " + config("pair.json") + " --schedule " +
                  config("staircase.json") + " --out " + pred.string()) == 0);
  CHECK(slurp(pred).find("\"fim\"") != std::string::npos);

  // same argv, same bytes
  const auto out2 = dir / "pair2.csv";
  REQUIRE(run_cli("recover --config " + config("pair.json") + " --method time_varying --out " +
                  out2.string()) == 0);
  CHECK(slurp(out) == slurp(out2));
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench exits 0 on a custom config") {
  const auto dir = std::filesystem::temp_directory_path() / "onebit_cli_bench";
  std::filesystem::create_directories(dir);
  const auto out = dir / "b.csv";
  CHECK(run_cli("bench --config " + config("fig2_small.json") + " --trials 20 --out " +
                out.string()) == 0);
  CHECK(slurp(out).find("fig2_small,dither") != std::string::npos);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
