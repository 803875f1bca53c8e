#include <unistd.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "scenred/cli.hpp"
#include "scenred/guarantee.hpp"
#include "scenred/model.hpp"

using namespace scenred;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "scenred");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("scenred_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("reduce then guarantee round trip") {
  TempDir dir;
  const auto u = dir.file("u.json");
  write_file(u, R"({"n":3,"scenarios":[[4,2,7],[2,3,1],[5,5,5],[1,9,2],[6,1,3]]})");
  const std::vector<std::vector<std::string>> variants{
      {"--method", "ip-lambda", "--k", "3"},
      {"--method", "ip-mu", "--k", "2"},
      {"--method", "cont", "--k", "2", "--seed", "4"},
      {"--method", "kmeans", "--k", "2", "--seed", "4"},
      {"--method", "midpoint", "--k", "1"},
      {"--method", "ip2", "--k", "2", "--stage", "2"},
      {"--method", "greedy2", "--k", "2", "--stage", "2"},
  };
  for (const auto& v : variants) {
    const auto r = dir.file("r.json");
    std::vector<std::string> args{"reduce", "--input", u, "--out", r};
    args.insert(args.end(), v.begin(), v.end());
    const auto red = run(args);
    REQUIRE_MESSAGE(red.code == 0, red.err);
    const auto res = load_reduction_result(read_file(r));
    CHECK(res.t > 0.0);
    const auto g = run({"guarantee", "--input", u, "--result", r});
    CHECK_MESSAGE(g.code == 0, g.out);
    CHECK(g.out.rfind("pass", 0) == 0);
  }
}

TEST_CASE("identical command lines give identical bytes") {
  TempDir dir;
  const auto u = dir.file("u.json");
  write_file(u, R"({"n":2,"scenarios":[[4,2],[2,3],[3,3],[1,5]]})");
  const auto a = run({"reduce", "--input", u, "--k", "2", "--method", "cont", "--seed", "9"});
  const auto b = run({"reduce", "--input", u, "--k", "2", "--method", "cont", "--seed", "9"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("\"t\"") != std::string::npos);
  CHECK(a.out.find("\"guarantee\"") != std::string::npos);
}

TEST_CASE("guarantee reports a failing certificate") {
  TempDir dir;
  const auto u = dir.file("u.json");
  const auto r = dir.file("r.json");
  write_file(u, R"({"n":2,"scenarios":[[4,2],[2,3]]})");
  write_file(r, R"({"method":"ip2","stage":2,"K":1,"t":0.6666666666666666,"guarantee":1.5,)"
                R"("reduced":[[2,3]],"lambda":[[0,1]],"mu":[[1],[1]]})");
  const auto g = run({"guarantee", "--input", u, "--result", r});
  CHECK(g.code == 1);
  CHECK(g.out.rfind("fail", 0) == 0);
}

TEST_CASE("heatmap minimum for stage 2") {
  TempDir dir;
  const auto u = dir.file("u.json");
  const auto h = dir.file("h.csv");
  write_file(u, R"({"n":2,"scenarios":[[4,2],[2,3]]})");
  const auto r = run({"heatmap", "--input", u, "--stage", "2", "--min", "0.1", "--max", "6",
                      "--step", "0.01", "--out", h});
  REQUIRE(r.code == 0);
  std::istringstream in(read_file(h));
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,guarantee,capped");
  double best = kInf;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string x, y, g;
    std::getline(row, x, ',');
    std::getline(row, y, ',');
    std::getline(row, g, ',');
    best = std::min(best, std::stod(g));
  }
  CHECK(std::abs(best - 1.5) <= 1e-6);
}

TEST_CASE("solve subcommand") {
  TempDir dir;
  const auto u = dir.file("u.json");
  const auto inst = dir.file("i.json");
  write_file(u, R"({"n":2,"scenarios":[[4,2],[2,3]]})");
  write_file(inst, R"({"kind":"selection","stages":1,"n":2,"p":1})");
  const auto r = run({"solve", "--instance", inst, "--scenarios", u});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"value\"") != std::string::npos);
}

TEST_CASE("exit codes and errors") {
  TempDir dir;
  const auto u = dir.file("u.json");
  write_file(u, R"({"n":2,"scenarios":[[4,-1]]})");
  auto r = run({"reduce", "--input", u, "--k", "1", "--method", "ip-lambda"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error[") != std::string::npos);

  write_file(u, R"({"n":2,"scenarios":[[4,2],[2,3]]})");
  r = run({"reduce", "--input", u, "--k", "1", "--method", "cont"});
  CHECK(r.code == 1);  // missing --seed
  r = run({"reduce", "--input", u, "--k", "3", "--method", "ip-lambda"});
  CHECK(r.code == 1);
  r = run({"reduce", "--input", u, "--k", "1", "--method", "ip-lambda", "--bogus"});
  CHECK(r.code == 1);
  r = run({"frobnicate"});
  CHECK(r.code == 1);
  r = run({"reduce", "--input", dir.file("missing.json"), "--k", "1", "--method", "ip-lambda"});
  CHECK(r.code == 1);
  r = run({"exp1"});
  CHECK(r.code == 1);
}

TEST_CASE("help and version") {
  auto r = run({"--help"});
  CHECK(r.code == 0);
  for (const char* sub : {"reduce", "guarantee", "heatmap", "solve", "exp1", "exp2", "oracle-check"}) {
    r = run({sub, "--version"});
    CHECK(r.code == 0);
    CHECK(r.out.find("scenred") != std::string::npos);
    r = run({sub, "--help"});
    CHECK(r.code == 0);
  }
}

TEST_CASE("experiment subcommands write CSV and metadata") {
  TempDir dir;
  auto r = run({"exp1", "--seed", "3", "--n", "3", "--N", "6", "--k", "2", "--sets", "2", "--points", "5",
                "--cont-reps", "1", "--kmeans-reps", "5", "--out-dir", dir.path.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  bool csv = false, json = false;
  for (const auto& e : fs::directory_iterator(dir.path)) {
    csv = csv || e.path().extension() == ".csv";
    json = json || e.path().extension() == ".json";
  }
  CHECK(csv);
  CHECK(json);
  r = run({"exp2", "--seed", "3", "--n", "6", "--N", "4", "--instances", "2", "--k-max", "2",
           "--kmeans-reps", "5", "--out-dir", dir.path.string()});
  CHECK_MESSAGE(r.code == 0, r.err);
}

TEST_CASE("oracle-check passes") {
  const auto r = run({"oracle-check", "--seed", "1", "--cases", "5"});
  CHECK_MESSAGE(r.code == 0, r.out);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
