#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "nltraffic/cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nltraffic::run_command;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nltraffic_cli_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return nlohmann::json::parse(in);
}

std::string first_lines(const fs::path& file, int n) {
  std::ifstream in(file);
  std::string line, out;
  for (int i = 0; i < n && std::getline(in, line); ++i) out += line + "\n";
  return out;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "nltraffic");
  return run_command(args);
}

const std::string local = testsupport::scenario_path("gradcheck_local");

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate writes the field and a manifest") {
    const fs::path out = fresh_dir("simulate");
    CHECK(run({"simulate", "--scenario", local, "--out-dir", out.string(), "--stride", "50"}) == 0);
    CHECK(fs::exists(out / "field.csv"));
    const std::string head = first_lines(out / "field.csv", 2);
    CHECK(head.rfind("# schema:", 0) == 0);
    CHECK(head.find("edge_id,t,x_center,m,v") != std::string::npos);
    const auto m = manifest(out);
    CHECK(m["status"] == "ok");
    CHECK(m["command"] == "simulate");
    CHECK(m.contains("version"));
    CHECK(m.contains("timestamp"));
  }

  TEST_CASE("gradcheck writes one row per duration") {
    const fs::path out = fresh_dir("gradcheck");
    CHECK(run({"gradcheck", "--scenario", local, "--out-dir", out.string()}) == 0);
    std::ifstream in(out / "gradcheck.csv");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
      if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 6);
  }

  TEST_CASE("exit codes") {
    const fs::path out = fresh_dir("errors");
    CHECK(run({}) == nltraffic::exit_usage);
    CHECK(run({"fly"}) == nltraffic::exit_usage);
    CHECK(run({"simulate", "--scenario", local, "--bogus"}) == nltraffic::exit_usage);
    CHECK(run({"simulate", "--scenario", "/nonexistent/none.ini", "--out-dir", out.string()}) == nltraffic::exit_io);
    CHECK_FALSE(fs::exists(out / "manifest.json"));
    CHECK(run({"simulate", "--scenario", local, "--out-dir", out.string(), "--durations", "0.2,-0.1"}) ==
          nltraffic::exit_validation);
    CHECK(run({"simulate", "--scenario", local, "--out-dir", out.string(), "--cfl", "1.5"}) ==
          nltraffic::exit_validation);
  }

  TEST_CASE("unsupported topology for the gradient") {
    const fs::path dir = fresh_dir("split");
    fs::create_directories(dir);
    {
      std::ofstream f(dir / "split.ini");
      f << "[network]\na = S -> V, 1.0\nb = V -> T1, 1.0\nc = V -> T2, 1.0\n[grid]\nT = 0.5\ndx = 0.02\n"
           "[lights]\njunction = V\nedges = a\nradius = 0.1\nu0 = 0\ndurations = 0.2, 0.3\nT_G = 0.1\nT_R = 0.4\n"
           "[matrixP]\na = b:0.5, c:0.5\n";
    }
    CHECK(run({"gradcheck", "--scenario", (dir / "split.ini").string(), "--out-dir", (dir / "out").string()}) ==
          nltraffic::exit_unsupported);
  }

  TEST_CASE("avsim needs a fleet block") {
    const fs::path out = fresh_dir("avsim");
    CHECK(run({"avsim", "--scenario", local, "--out-dir", out.string()}) == nltraffic::exit_validation);
    CHECK(run({"avsim", "--scenario", "fleet_demo", "--out-dir", out.string(), "--stride", "100"}) == 0);
    CHECK(fs::exists(out / "fleet.csv"));
  }
}
