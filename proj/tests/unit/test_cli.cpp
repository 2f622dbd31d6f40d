#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coalsim/cli.hpp"
#include "json.hpp"

using namespace coalsim;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) v.push_back(line);
  return v;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("coalsim_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("rates for bolthausen-sznitman at x = 2") {
  const Run r = cli({"rates", "--measure", "bolthausen-sznitman", "--x", "2"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  const auto head = split(ls[0]);
  const auto row = split(ls[1]);
  REQUIRE(head.size() == row.size());
  CHECK(head[0] == "x");
  CHECK(head[1] == "mu");
  CHECK(std::stod(row[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rates json and b table") {
  Run r = cli({"rates", "--measure", "kingman", "--x", "2,3", "--format", "json"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  REQUIRE(j.size() == 2);
  CHECK(j[1]["mu"] == 3.0);
  r = cli({"rates", "--measure", "bolthausen-sznitman", "--b", "4"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 4);
  CHECK(std::stod(split(ls[1])[2]) == doctest::Approx(1.0 / 3));
}

TEST_CASE("simulate kingman n = 3 gives two jumps") {
  const Run r = cli({"simulate", "--measure", "kingman", "--n", "3", "--seed", "7", "--reps", "1"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  REQUIRE(j["paths"].size() == 1);
  CHECK(j["paths"][0]["jumps"].size() == 2);
  CHECK(j["seed"] == 7);
}

TEST_CASE("simulate csv and labeled mode") {
  Run r = cli({"simulate", "--measure", "bolthausen-sznitman", "--n", "20", "--reps", "3", "--format", "csv"});
  REQUIRE(r.code == kExitOk);
  CHECK(lines(r.out)[0] == "replication,index,x_before,k,dy,w,t");
  r = cli({"simulate", "--measure", "kingman", "--n", "5", "--labeled"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("partitions") != std::string::npos);
}

TEST_CASE("lengths output") {
  const Run r = cli({"lengths", "--measure", "kingman", "--n", "10", "--reps", "2", "--top", "3"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  CHECK(ls[0] == "replication,rank,length");
  CHECK(ls.size() == 1 + 2 * 3);
}

TEST_CASE("limits output") {
  const Run r = cli({"limits", "--law", "frechet", "--alpha", "2", "--x", "1"});
  REQUIRE(r.code == kExitOk);
  CHECK(std::stod(split(lines(r.out)[1])[1]) == doctest::Approx(std::exp(-1.0)));
  const Run m = cli({"limits", "--law", "moehle", "--n", "10", "--t", "0", "--r", "2"});
  REQUIRE(m.code == kExitOk);
  CHECK(m.out.find("110") != std::string::npos);
}

TEST_CASE("experiment report and verdict exit codes") {
  Run r = cli({"experiment", "--theorem", "C1.4", "--measure", "kingman", "--n", "200", "--reps", "300", "--seed", "1",
               "--tol", "ks=0.5"});
  CHECK(r.code == kExitOk);
  json j = json::parse(r.out);
  CHECK(j["verdict"] == "PASS");
  CHECK(j["config"]["tolerances"]["ks"] == 0.5);
  r = cli({"experiment", "--theorem", "C1.4", "--measure", "kingman", "--n", "200", "--reps", "300", "--tol", "ks=1e-9"});
  CHECK(r.code == kExitVerdictFail);
  CHECK(json::parse(r.out)["verdict"] == "FAIL");
}

TEST_CASE("experiment outputs files and a metadata side file") {
  const auto out = temp_file("report.json");
  const auto curves = temp_file("curves.csv");
  const Run r = cli({"experiment", "--theorem", "C1.4", "--n", "100", "--reps", "200", "-o", out.string(), "--curves",
                     curves.string(), "--tol", "ks=0.5"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  CHECK(json::parse(slurp(out))["verdict"] == "PASS");
  const json meta = json::parse(slurp(out.string() + ".meta.json"));
  CHECK(meta.contains("runtime_ms"));
  CHECK(slurp(curves).rfind("curve,x,empirical,theoretical", 0) == 0);
  std::filesystem::remove(out);
  std::filesystem::remove(out.string() + ".meta.json");
  std::filesystem::remove(curves);
}

TEST_CASE("identical argv gives identical output across thread counts") {
  const std::vector<std::string> base{"experiment", "--theorem", "T1.2", "--measure", "bolthausen-sznitman",
                                      "--n", "200", "--reps", "300", "--k", "3"};
  auto with_threads = [&](const char* t) {
    auto args = base;
    args.push_back("--threads");
    args.push_back(t);
    return cli(args);
  };
  const Run a = with_threads("1");
  const Run b = with_threads("4");
  const Run c = with_threads("1");
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
}

TEST_CASE("usage errors exit 2") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"rates", "--measure", "kingman", "--x", "2", "--zzz", "1"}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"simulate", "--n", "1"}).code == kExitUsage);
  CHECK(cli({"simulate"}).code == kExitUsage);
  CHECK(cli({"experiment", "--theorem", "X9"}).code == kExitUsage);
  const Run bad = cli({"rates", "--measure", "kingmann", "--x", "2"});
  CHECK(bad.code == kExitUsage);
  const json e = json::parse(bad.err);
  CHECK(e["error"] == "ParseError");
}

TEST_CASE("numeric and regime errors exit 1 with error json") {
  Run r = cli({"experiment", "--theorem", "T1.5", "--measure", "bolthausen-sznitman", "--n", "100", "--reps", "100"});
  CHECK(r.code == kExitFailure);
  json e = json::parse(r.err);
  CHECK(e["error"] == "RegimeError");
  CHECK(e.contains("message"));
  r = cli({"rates", "--measure", "kingman", "--x", "0.5"});
  CHECK(r.code == kExitFailure);
  CHECK(json::parse(r.err)["error"] == "DomainError");
}

TEST_CASE("config file supplies flags and the command line wins") {
  const auto cfg = temp_file("config.json");
  {
    std::ofstream f(cfg);
    f << R"({"measure": "bolthausen-sznitman", "x": [2, 3], "format": "json"})";
  }
  Run r = cli({"rates", "--config", cfg.string()});
  REQUIRE(r.code == kExitOk);
  json j = json::parse(r.out);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["mu"].get<double>() == doctest::Approx(1.0));
  r = cli({"rates", "--config", cfg.string(), "--measure", "kingman"});
  REQUIRE(r.code == kExitOk);
  j = json::parse(r.out);
  CHECK(j[1]["mu"].get<double>() == doctest::Approx(3.0));
  {
    std::ofstream f(cfg);
    f << R"({"measure": "kingman", "bogus_key": 1})";
  }
  CHECK(cli({"rates", "--config", cfg.string(), "--x", "2"}).code == kExitUsage);
  std::filesystem::remove(cfg);
}

TEST_CASE("help documents flags and exits 0") {
  for (const char* sub : {"rates", "simulate", "lengths", "experiment", "limits"}) {
    const Run r = cli({sub, "--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("--format") != std::string::npos);
  }
  const Run h = cli({"experiment", "--help"});
  CHECK(h.out.find("--c") != std::string::npos);
  CHECK(h.out.find("t_{c,n}") != std::string::npos);
  CHECK(cli({"--version"}).code == kExitOk);
}

TEST_CASE("seed defaults to a fixed constant") {
  const Run a = cli({"simulate", "--measure", "kingman", "--n", "5"});
  const Run b = cli({"simulate", "--measure", "kingman", "--n", "5"});
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out)["seed"] == 20240611);
}
