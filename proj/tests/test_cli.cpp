// Drives the installed CLI binary end to end: exit-code contract, file
// outputs, and byte-identical reruns.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "finsler/finsler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return FINSLER_CLI_PATH; }

int run_cli(const std::string& args) {
  std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("finsler_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: catalog lists entries") { CHECK(run_cli("catalog") == 0); }

TEST_CASE("cli: eval prints a value table") {
  fs::path dir = fresh_dir("eval");
  json cfg = {{"structure", "euclidean"},
              {"seed", 7},
              {"points", {{0.5, 0.5}}},
              {"vectors", {{3, 4}}}};
  write_json(dir / "eval.json", cfg);
  CHECK(run_cli("eval --config " + (dir / "eval.json").string()) == 0);
}

TEST_CASE("cli: distance writes binary and csv maps") {
  fs::path dir = fresh_dir("distance");
  json cfg = {{"structure", "euclidean"},
              {"seed", 7},
              {"source", {0.0, 0.0}},
              {"grid", {{"resolutions", {41}}, {"stencil", 16}}}};
  write_json(dir / "dmap.json", cfg);
  CHECK(run_cli("distance --config " + (dir / "dmap.json").string() + " --out " +
                dir.string()) == 0);

  auto bin = slurp(dir / "dmap_41.bin");
  auto map = finsler::distance_map_from_binary(bin);
  CHECK(map.grid.res[0] == 41);
  CHECK(map.values.size() == 41u * 41u);
  CHECK(fs::exists(dir / "dmap_41.csv"));
}

TEST_CASE("cli: coincide pass, deliberate misconfiguration, and determinism") {
  fs::path dir = fresh_dir("coincide");
  json cfg = {{"structure", "riem-diag-4-1"},
              {"seed", 99},
              {"grid", {{"resolutions", {51, 101}}, {"stencil", 16}}},
              {"functions", {{{"kind", "linear"}, {"covector", {1, 0}}}}},
              {"samples", {{"count", 8}, {"radius_cells", {8, 4}}}},
              {"expect", "coincide"}};
  write_json(dir / "riem.json", cfg);

  std::string base = "coincide --config " + (dir / "riem.json").string();
  CHECK(run_cli(base + " --out " + (dir / "a").string()) == 0);
  CHECK(run_cli(base + " --out " + (dir / "b").string()) == 0);

  // Identical config + seed => byte-identical reports.
  CHECK(slurp(dir / "a" / "riem.json") == slurp(dir / "b" / "riem.json"));
  CHECK(slurp(dir / "a" / "riem.csv") == slurp(dir / "b" / "riem.csv"));

  auto rep = json::parse(slurp(dir / "a" / "riem.json"));
  CHECK(rep["schema_version"] == 1);
  CHECK(rep["pass"] == true);

  // The counterexample observed to fail coincidence: expect=fail exits 0,
  // expect=coincide on the same scenario exits 1.
  json cant = {{"structure", "nonusc-cantor"},
               {"seed", 5},
               {"grid", {{"resolutions", {101, 201}}, {"stencil", 16}}},
               {"functions", {{{"kind", "linear"}, {"covector", {1, 0}}}}},
               {"samples",
                {{"count", 4}, {"deep_in_set", true}, {"radius_cells", {16, 8}}}},
               {"expect", "fail"}};
  write_json(dir / "cant_fail.json", cant);
  cant["expect"] = "coincide";
  write_json(dir / "cant_coincide.json", cant);

  CHECK(run_cli("coincide --config " + (dir / "cant_fail.json").string() + " --out " +
                dir.string()) == 0);
  CHECK(run_cli("coincide --config " + (dir / "cant_coincide.json").string() +
                " --out " + dir.string()) == 1);
}

TEST_CASE("cli: converge emits the monotonicity study") {
  fs::path dir = fresh_dir("converge");
  json cfg = {{"structure", "euclidean"},
              {"seed", 3},
              {"grid", {{"resolutions", {41, 81}}, {"stencil", 16}}},
              {"pairs", 10},
              {"n_values", {1, 2, 4}}};
  write_json(dir / "conv.json", cfg);
  CHECK(run_cli("converge --config " + (dir / "conv.json").string() + " --out " +
                dir.string()) == 0);
  std::string csv = slurp(dir / "conv.csv");
  CHECK(csv.find("fnstar_monotone") != std::string::npos);
  CHECK(csv.find("fail") == std::string::npos);

  // Euclidean distance error against |x-y| decreases from 41 to 81 nodes.
  auto last_err_for = [&](const std::string& res) {
    double err = -1;
    std::size_t pos = 0;
    while ((pos = csv.find("euclidean,", pos)) != std::string::npos) {
      std::size_t eol = csv.find('\n', pos);
      std::string line = csv.substr(pos, eol - pos);
      if (line.find("," + res + ",") != std::string::npos)
        err = std::atof(line.substr(line.rfind(',') + 1).c_str());
      pos = eol;
    }
    return err;
  };
  double err41 = last_err_for("41"), err81 = last_err_for("81");
  CHECK(err41 >= 0);
  CHECK(err81 >= 0);
  CHECK(err81 <= err41 + 1e-12);
}

TEST_CASE("cli: configuration errors exit with code 2") {
  fs::path dir = fresh_dir("badcfg");

  json unknown = {{"structure", "does-not-exist"}, {"seed", 1}};
  write_json(dir / "unknown.json", unknown);
  CHECK(run_cli("eval --config " + (dir / "unknown.json").string()) == 2);

  json noseed = {{"structure", "euclidean"},
                 {"points", {{0.5, 0.5}}},
                 {"vectors", {{1, 0}}}};
  write_json(dir / "noseed.json", noseed);
  CHECK(run_cli("eval --config " + (dir / "noseed.json").string()) == 2);

  json shrink = {{"structure", "euclidean"},
                 {"seed", 1},
                 {"source", {0.0, 0.0}},
                 {"grid", {{"resolutions", {81, 41}}}}};
  write_json(dir / "shrink.json", shrink);
  CHECK(run_cli("distance --config " + (dir / "shrink.json").string() + " --out " +
                dir.string()) == 2);

  write_json(dir / "notjson.json", json::object());
  std::ofstream(dir / "notjson.json") << "{ not valid";
  CHECK(run_cli("eval --config " + (dir / "notjson.json").string()) == 2);

  CHECK(run_cli("eval") == 2);  // missing --config
}
