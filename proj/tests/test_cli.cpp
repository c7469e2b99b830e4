// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using std::filesystem::path;

namespace {

const char* kCli = BTPERM_CLI_PATH;

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run(const std::string& args, const path& dir) {
  const path out_file = dir / "cmd_output.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" + std::string(kCli) + "' " +
                          args + " > '" + out_file.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  result.output = ss.str();
  return result;
}

std::string read_file(const path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

path make_workdir(const std::string& name) {
  const path dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_config(const path& dir, const std::string& extra = "") {
  std::ofstream cfg(dir / "run.cfg");
  cfg << "case = cli_test\n"
         "grid_n = 3\n"
         "half_extent = 13.6\n"
         "neig = 24\n"
         "iters = 4\n"
         "t_switch = 2\n"
         "cycle = 4\n"
         "warmup = 1\n"
         "lambda_man_ramp = 4\n"
         "refresh_n = 2\n"
         "seed = 3\n"
         "workers = 1\n"
         "shape_kind = sphere\n"
         "shape_radius = 8\n"
         "ref_interface_path = interface.txt\n"
      << extra;
}

} // namespace

TEST_CASE("cli pipeline: grid -> phantom -> forward -> invert -> eval") {
  const path dir = make_workdir("btperm_cli_pipeline");
  write_config(dir);

  const CommandResult grid = run("grid --config run.cfg", dir);
  REQUIRE(grid.exit_code == 0);
  CHECK(grid.output.find("tets=162") != std::string::npos);
  CHECK(grid.output.find("interior_faces=270") != std::string::npos);

  const CommandResult phantom = run("phantom --config run.cfg", dir);
  REQUIRE(phantom.exit_code == 0);
  CHECK(phantom.output.find("barrier_faces=") != std::string::npos);

  const CommandResult forward = run("forward --config run.cfg", dir);
  REQUIRE(forward.exit_code == 0);
  CHECK(forward.output.find("acquisitions=36") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "protocol.txt"));

  const CommandResult invert = run("invert --config run.cfg", dir);
  REQUIRE(invert.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "out" / "history.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "field.txt"));
  CHECK(std::filesystem::exists(dir / "out" / "interface.txt"));

  // History: header + one row per iteration, phases switch at t_switch.
  std::istringstream history(read_file(dir / "out" / "history.csv"));
  std::string line;
  std::getline(history, line);
  CHECK(line == "iter,loss_total,loss_data,reg_cont,reg_man,lr,phase");
  int rows = 0, long_rows = 0, short_rows = 0;
  while (std::getline(history, line)) {
    ++rows;
    if (line.find(",long") != std::string::npos) ++long_rows;
    if (line.find(",short") != std::string::npos) ++short_rows;
  }
  CHECK(rows == 4);
  CHECK(long_rows == 2);
  CHECK(short_rows == 2);

  // Self-evaluation of the ground truth: exact signal match, zero Chamfer.
  const CommandResult eval = run("eval --config run.cfg", dir);
  CAPTURE(eval.output);
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.output.find("signal_mse=0\n") != std::string::npos);
  CHECK(eval.output.find("cd_l2=0\n") != std::string::npos);

  std::filesystem::remove_all(dir);
}

TEST_CASE("cli determinism: same config and seed, different workers") {
  const path dir = make_workdir("btperm_cli_determinism");
  write_config(dir);
  REQUIRE(run("grid --config run.cfg", dir).exit_code == 0);
  REQUIRE(run("phantom --config run.cfg", dir).exit_code == 0);
  REQUIRE(run("forward --config run.cfg", dir).exit_code == 0);

  REQUIRE(run("invert --config run.cfg --out run_a --workers 1", dir).exit_code == 0);
  REQUIRE(run("invert --config run.cfg --out run_b --workers 2", dir).exit_code == 0);
  CHECK(read_file(dir / "run_a" / "history.csv") == read_file(dir / "run_b" / "history.csv"));
  CHECK(read_file(dir / "run_a" / "field.txt") == read_file(dir / "run_b" / "field.txt"));

  std::filesystem::remove_all(dir);
}

TEST_CASE("cli exit codes distinguish config and io failures") {
  const path dir = make_workdir("btperm_cli_errors");

  // Unknown config key -> 2.
  std::ofstream(dir / "bad.cfg") << "grid_n = 2\nnot_a_key = 1\n";
  CHECK(run("grid --config bad.cfg", dir).exit_code == 2);

  // Missing required input -> config error (2).
  write_config(dir);
  CHECK(run("phantom --config run.cfg", dir).exit_code == 2);

  // Corrupt mesh file -> io error (4).
  REQUIRE(run("grid --config run.cfg", dir).exit_code == 0);
  std::ofstream(dir / "mesh.txt") << "VERTICES 1\n0 0 0\nTETS 1\n0 0 0 0\n";
  CHECK(run("phantom --config run.cfg", dir).exit_code == 4);

  // Missing --config entirely -> 2.
  CHECK(run("grid", dir).exit_code == 2);
  CHECK(run("--help", dir).exit_code == 0);

  std::filesystem::remove_all(dir);
}
