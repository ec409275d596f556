#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(RIGIDFLOW_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

const std::string kScenarios = RIGIDFLOW_SCENARIOS;

}  // namespace

TEST_CASE("cli exit codes") {
  CHECK(cli("check-compat --scenario " + kScenarios + "/rest.ini") == 0);
  CHECK(cli("check-compat --scenario /nonexistent.ini") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("run") == 2);

  const fs::path unknown = write_temp("rf_unknown.ini",
      "[geometry]\nr_s = 0.5\nR_o = 2\nwibble = 1\n[eos]\ngamma = 1.4\n[initial]\npreset = rest\n");
  CHECK(cli("check-compat --scenario " + unknown.string()) == 2);

  const fs::path inverted = write_temp("rf_inverted.ini",
      "[geometry]\nr_s = 3\nR_o = 2\n[eos]\ngamma = 1.4\n[initial]\npreset = rest\n");
  CHECK(cli("check-compat --scenario " + inverted.string()) == 3);
  CHECK(cli("check-compat --scenario " + kScenarios + "/rest.ini --resolution 12by4") == 3);

  // a pulse sitting on the wall is not compatible to a tiny threshold
  const fs::path wall = write_temp("rf_wall.ini",
      "[geometry]\nr_s = 0.5\nR_o = 2\n[eos]\ngamma = 1.4\n[initial]\npreset = acoustic-pulse\n"
      "center = 0.5\namplitude = 0.1\n[check]\nthreshold = 1e-14\n");
  CHECK(cli("check-compat --scenario " + wall.string()) == 1);

  // state leaves the box during the run
  const fs::path boom = write_temp("rf_boom.ini",
      "[geometry]\nr_s = 0.5\nR_o = 2\n[mesh]\nN_r = 12\nN_theta = 24\n[eos]\ngamma = 1.4\np_min = 0.99\n"
      "[initial]\npreset = acoustic-pulse\namplitude = 0.15\ncenter = 0.8\n[run]\nt_end = 1\n");
  const fs::path out = fs::temp_directory_path() / "rf_boom_out";
  CHECK(cli("run --scenario " + boom.string() + " --out " + out.string()) == 4);

  for (const fs::path& p : {unknown, inverted, wall, boom}) fs::remove(p);
  fs::remove_all(out);
}

TEST_CASE("cli run writes series and honours overrides") {
  const fs::path out = fs::temp_directory_path() / "rf_cli_run";
  fs::remove_all(out);
  REQUIRE(cli("run --scenario " + kScenarios + "/rest.ini --out " + out.string() +
              " --threads 2 --resolution 8x16 --eps 0.1") == 0);
  std::ifstream f(out / "series.csv");
  std::string header, first;
  std::getline(f, header);
  std::getline(f, first);
  CHECK(header == "t,E0,E1,bc_mismatch,vort_res,ent_res,l_1,l_2,omega,h_1,h_2,picard_iters");
  CHECK(first.rfind("0,", 0) == 0);
  std::ifstream sc(out / "scenario.ini");
  const std::string text((std::istreambuf_iterator<char>(sc)), std::istreambuf_iterator<char>());
  CHECK(text.find("N_r = 8") != std::string::npos);
  CHECK(text.find("eps = 0.10000000000000001") != std::string::npos);
  fs::remove_all(out);
}
