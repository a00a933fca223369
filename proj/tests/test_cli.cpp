#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + (env.empty() ? "" : " ") + std::string(SOFTQ_CLI_PATH) + " " + args +
      " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("softq-cli-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

const std::string kConfigs = SOFTQ_CONFIG_DIR;

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("solve") == 2);                          // missing required --mdp
  CHECK(run_cli("solve --mdp /does/not/exist.json") == 2);
  CHECK(run_cli("bounds --kind bogus --k 1 --params " + kConfigs +
                "/bound_params.example.json") == 2);
  CHECK(run_cli("run --preset fig9") == 2);
}

TEST_CASE("solve and bounds subcommands succeed on valid input") {
  CHECK(run_cli("solve --mdp builtin") == 0);
  CHECK(run_cli("solve --mdp " + kConfigs + "/two_state_mdp.json --operator lse --beta 100") ==
        0);
  CHECK(run_cli("bounds --kind lse-final --k 100000 --params " + kConfigs +
                "/bound_params.example.json") == 0);
  CHECK(run_cli("bounds --kind boltz-final --k 100000 --mode paper-loose --params " +
                kConfigs + "/bound_params.example.json") == 0);
  const auto curve = fresh_dir("curve");
  std::filesystem::create_directories(curve);
  CHECK(run_cli("bounds --kind trace --k 1000 --params " + kConfigs +
                "/bound_params.example.json --curve " + (curve / "c.csv").string()) == 0);
  const std::string body = read_file(curve / "c.csv");
  CHECK(body.rfind("k,bound\n", 0) == 0);
}

TEST_CASE("run subcommand writes outputs and respects SOFTQ_SEED") {
  const auto out_a = fresh_dir("run-a");
  const auto out_b = fresh_dir("run-b");
  const auto out_c = fresh_dir("run-c");
  const std::string config = kConfigs + "/smoke_run.json";
  CHECK(run_cli("run --config " + config + " --out " + out_a.string()) == 0);
  CHECK(run_cli("run --config " + config + " --out " + out_b.string()) == 0);
  CHECK(run_cli("run --config " + config + " --out " + out_c.string(), "SOFTQ_SEED=77") == 0);
  for (const char* name : {"lse_sweep.csv", "lse_details.csv", "lse_sweep.svg", "meta.json"}) {
    CHECK(std::filesystem::exists(out_a / name));
  }
  CHECK(read_file(out_a / "lse_sweep.csv") == read_file(out_b / "lse_sweep.csv"));
  CHECK(read_file(out_a / "lse_sweep.csv") != read_file(out_c / "lse_sweep.csv"));
}

TEST_CASE("verify --quick reports and exits zero") {
  const auto dir = fresh_dir("verify");
  std::filesystem::create_directories(dir);
  const auto report = dir / "report.json";
  CHECK(run_cli("verify --quick --report " + report.string()) == 0);
  const std::string body = read_file(report);
  CHECK(body.find("\"mode\": \"quick\"") != std::string::npos);
  CHECK(body.find("\"all_pass\": true") != std::string::npos);
}
