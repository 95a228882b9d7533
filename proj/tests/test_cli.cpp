// Drives the command-line tool as a subprocess.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ETPC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kConfigs = ETPC_CONFIG_DIR;
const fs::path kWork = fs::temp_directory_path() / "etpc_cli_test";

}  // namespace

TEST_CASE("usage and config errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("simulate --set plant.bogus=1") == 2);
  CHECK(run("simulate --set trigger.sigma=2") == 2);
}

TEST_CASE("validate") {
  CHECK(run("validate --config " + (kConfigs / "lorenz_trajectory.ini").string()) == 0);
  CHECK(run("validate --config " + (kConfigs / "vanderpol.ini").string()) == 0);
  CHECK(run("validate --config " + (kConfigs / "bad_certificate.ini").string()) == 3);
  const std::string out = (kWork / "validate.txt").string();
  fs::create_directories(kWork);
  (void)!std::system((std::string(ETPC_CLI) + " validate --config " + (kConfigs / "bad_certificate.ini").string() +
               " > " + out)
                  .c_str());
  const auto text = slurp(out);
  CHECK(text.find("dissipation inequality violated at sample") != std::string::npos);
}

TEST_CASE("simulate writes the trajectory files and a reusable manifest") {
  const fs::path a = kWork / "sim_a", b = kWork / "sim_b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(run("simulate --config " + (kConfigs / "lorenz_trajectory.ini").string() + " --out " + a.string()) == 0);
  for (const char* mode : {"etpc_static", "zoh_static"}) {
    CHECK(fs::exists(a / mode / "samples.csv"));
    CHECK(fs::exists(a / mode / "events.csv"));
  }
  REQUIRE(fs::exists(a / "manifest"));
  REQUIRE(run("simulate --config " + (a / "manifest").string() + " --out " + b.string()) == 0);
  CHECK(slurp(a / "manifest") == slurp(b / "manifest"));
  CHECK(slurp(a / "etpc_static" / "samples.csv") == slurp(b / "etpc_static" / "samples.csv"));
  CHECK(slurp(a / "zoh_static" / "events.csv") == slurp(b / "zoh_static" / "events.csv"));
}

TEST_CASE("sweep output is reproducible") {
  const fs::path a = kWork / "sweep_a", b = kWork / "sweep_b";
  const std::string args = " --config " + (kConfigs / "lorenz_sweep.ini").string() +
                           " --set experiment.initial_conditions=3 --set experiment.events_cap=10"
                           " --set experiment.horizons=0.4 --seed 7 --out ";
  REQUIRE(run("sweep" + args + a.string()) == 0);
  REQUIRE(run("sweep --threads 1" + args + b.string()) == 0);
  for (const char* f : {"manifest", "table.csv", "table_layout.csv", "runs.jsonl"})
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  CHECK(fs::exists(a / "timing.csv"));
  CHECK(slurp(a / "manifest").find("seed = 7") != std::string::npos);
}

TEST_CASE("compare writes the method table") {
  const fs::path a = kWork / "compare";
  REQUIRE(run("compare --config " + (kConfigs / "lorenz_compare.ini").string() +
              " --set experiment.initial_conditions=2 --set experiment.events_cap=5 --out " + a.string()) == 0);
  CHECK(slurp(a / "table_layout.csv").find("ETPC-dynamic") != std::string::npos);
}
