#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "wsdep/cli.h"
#include "wsdep/io.h"

namespace wsdep {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("wsdep_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

TEST_SUITE("cli") {

TEST_CASE("simulate is deterministic and round-trips the graph") {
  TempDir a("sim_a"), b("sim_b");
  const std::vector<std::string> base{"simulate", "--kind", "ssb", "--m", "6",
                                      "--cliques", "3", "--n", "1000", "--seed", "7"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out-dir", a.path.string()});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out-dir", b.path.string()});
  Run ra = Invoke(args_a);
  REQUIRE(ra.code == kExitOk);
  CHECK(ra.out.find("m=6") != std::string::npos);
  CHECK(ra.out.find("n=1000") != std::string::npos);
  REQUIRE(Invoke(args_b).code == kExitOk);
  for (const char* f : {"labels.csv", "graph.json", "params.json"}) {
    CHECK(fs::exists(a.path / f));
    CHECK(Slurp(a.path / f) == Slurp(b.path / f));
  }
  const SourceGraph g = GraphFromJson(ReadJsonFile(a / "graph.json"));
  CHECK(g == SourceGraph(6, {{0, 1}, {0, 2}, {1, 2}}));
  CHECK(ReadLabelsCsv(a / "labels.csv").n() == 1000);

  REQUIRE(Invoke({"simulate", "--n", "5", "--out-dir", a / "nested/dir"}).code == kExitOk);
  CHECK(fs::exists(a.path / "nested/dir/labels.csv"));
}

TEST_CASE("validation errors exit with 2") {
  TempDir d("val");
  CHECK(Invoke({"simulate", "--n", "0", "--out-dir", d.path.string()}).code == kExitValidation);
  CHECK(Invoke({"simulate", "--bogus"}).code == kExitValidation);
  CHECK(Invoke({"nonsense"}).code == kExitValidation);
  CHECK(Invoke({"diagnose", "--m", "10", "--d", "1", "--s", "5", "--a-min", "0.1",
                "--a-max", "0.2", "--c-min", "0.1", "--c-max", "0.2", "--r-e", "2",
                "--alpha", "1", "--beta", "1", "--psi1", "2", "--psim", "0.5",
                "--sigma", "1", "--kmin", "0.1", "--theta", "0"})
            .code == kExitValidation);
}

TEST_CASE("io errors exit with 4") {
  CHECK(Invoke({"learn", "--labels", "/nonexistent/labels.csv"}).code == kExitIo);
}

TEST_CASE("learn on the exact covariance and via the oracle") {
  TempDir d("learn");
  REQUIRE(Invoke({"simulate", "--m", "8", "--cliques", "3", "2", "--strong", "1.0",
                  "--weak", "0.8", "--accuracy", "0.5", "--n", "10", "--out-dir",
                  d.path.string()})
              .code == kExitOk);
  const std::vector<std::string> solver{"--lambda", "0.01", "--gamma", "0.3",
                                        "--threshold", "expected_edges", "--k", "4",
                                        "--max-iters", "20000"};
  auto exact = std::vector<std::string>{"learn", "--exact-cov", "--graph", d / "graph.json",
                                        "--params", d / "params.json", "--truth",
                                        d / "graph.json", "--out", d / "s1.json",
                                        "--out-decomposition", d / "d1.json"};
  exact.insert(exact.end(), solver.begin(), solver.end());
  REQUIRE(Invoke(exact).code == kExitOk);
  const Json s1 = ReadJsonFile(d / "s1.json");
  CHECK(s1.at("metrics").at("exact_match").get<bool>());
  CHECK(s1.contains("config"));
  CHECK(ReadJsonFile(d / "d1.json").contains("objective_trace"));

  REQUIRE(Invoke({"oracle", "--graph", d / "graph.json", "--params", d / "params.json",
                  "--out", d / "cov.csv"})
              .code == kExitOk);
  auto from_cov = std::vector<std::string>{"learn", "--from-cov", d / "cov.csv", "--truth",
                                           d / "graph.json", "--out", d / "s2.json",
                                           "--out-decomposition", d / "d2.json"};
  from_cov.insert(from_cov.end(), solver.begin(), solver.end());
  REQUIRE(Invoke(from_cov).code == kExitOk);
  const Json s2 = ReadJsonFile(d / "s2.json");
  CHECK(s2.at("metrics").at("exact_match").get<bool>());
  CHECK(s2.at("edges") == s1.at("edges"));

  REQUIRE(Invoke({"learn", "--from-cov", d / "cov.csv", "--lambda", "1e9", "--out",
                  d / "s3.json", "--out-decomposition", d / "d3.json"})
              .code == kExitOk);
  CHECK(ReadJsonFile(d / "s3.json").at("edges").empty());

  CHECK(Invoke({"learn", "--from-cov", d / "cov.csv", "--labels", d / "labels.csv"}).code ==
        kExitValidation);
}

TEST_CASE("learn reports divergence with exit 3 and still writes diagnostics") {
  TempDir d("diverge");
  REQUIRE(Invoke({"simulate", "--m", "6", "--cliques", "2", "--n", "500", "--out-dir",
                  d.path.string()})
              .code == kExitOk);
  Run r = Invoke({"learn", "--labels", d / "labels.csv", "--step", "fixed", "--eta", "1000",
                  "--lambda", "1e-4", "--out", d / "s.json", "--out-decomposition",
                  d / "dec.json"});
  CHECK(r.code == kExitNumerical);
  REQUIRE(fs::exists(d.path / "dec.json"));
  CHECK(ReadJsonFile(d / "dec.json").contains("error"));
}

TEST_CASE("diagnose is stable across runs") {
  TempDir d("diag");
  REQUIRE(Invoke({"simulate", "--m", "3", "--cliques", "2", "--n", "10", "--out-dir",
                  d.path.string()})
              .code == kExitOk);
  const std::vector<std::string> args{"diagnose", "--graph", d / "graph.json", "--params",
                                      d / "params.json", "--json"};
  auto a = args;
  a.push_back(d / "r1.json");
  auto b = args;
  b.push_back(d / "r2.json");
  REQUIRE(Invoke(a).code == kExitOk);
  REQUIRE(Invoke(b).code == kExitOk);
  const Json r1 = ReadJsonFile(d / "r1.json");
  CHECK(r1.contains("identifiability"));
  CHECK(r1.contains("lower_bound"));
  CHECK(r1.at("rates").size() == 2);
  Json a_report = r1, b_report = ReadJsonFile(d / "r2.json");
  a_report.erase("config");
  b_report.erase("config");
  CHECK(a_report.dump() == b_report.dump());
}

TEST_CASE("sweep outputs") {
  TempDir d("sweep");
  Run one = Invoke({"sweep", "--m", "6", "--cliques", "2", "--n-grid", "50", "--trials", "1",
                    "--methods", "rpca", "--out", d / "one.csv"});
  REQUIRE(one.code == kExitOk);
  CHECK(Slurp(d.path / "one.csv").find("rpca,50,1,") != std::string::npos);
  int lines = 0;
  std::istringstream in(Slurp(d.path / "one.csv"));
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 2);

  REQUIRE(Invoke({"sweep", "--m", "6", "--cliques", "2", "--n-grid", "50", "100",
                  "--trials", "1", "--methods", "rpca,baseline", "--out", d / "both.json"})
              .code == kExitOk);
  const Json both = ReadJsonFile(d / "both.json");
  CHECK(both.at("rows").size() == 4);
  CHECK(both.contains("ensemble"));

  {
    std::ofstream cfg(d / "sweep.cfg");
    cfg << "# comment\nm = 6\ncliques = 2\nn_grid = 40 60\ntrials = 1\nmethods = rpca\n";
  }
  REQUIRE(Invoke({"sweep", "--config", d / "sweep.cfg", "--out", d / "cfg.csv"}).code ==
          kExitOk);
  CHECK(Slurp(d.path / "cfg.csv").find("rpca,40,1,") != std::string::npos);
  CHECK(Slurp(d.path / "cfg.csv").find("rpca,60,1,") != std::string::npos);
  {
    std::ofstream cfg(d / "bad.cfg");
    cfg << "m = 6\nno_such_key = 1\n";
  }
  CHECK(Invoke({"sweep", "--config", d / "bad.cfg", "--out", d / "bad.csv"}).code ==
        kExitValidation);
}

TEST_CASE("oracle refuses large models") {
  TempDir d("oracle");
  Json g = {{"m", 21}, {"edges", Json::array()}};
  WriteJsonFile(d / "g.json", g);
  Json p = {{"theta_node", std::vector<double>(21, 0.0)},
            {"theta_edge", Json::array()},
            {"theta_y", 0.0},
            {"theta_y_node", std::vector<double>(21, 0.0)}};
  WriteJsonFile(d / "p.json", p);
  CHECK(Invoke({"oracle", "--graph", d / "g.json", "--params", d / "p.json", "--out",
                d / "cov.csv"})
            .code == kExitValidation);
}

}  // TEST_SUITE

}  // namespace
}  // namespace wsdep
