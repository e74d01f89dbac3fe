#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "edw/chess.hpp"
#include "edw/render.hpp"
#include "test_util.hpp"

using namespace edw;

namespace {

struct Run {
  std::string out;
  int code = -1;
};

Run cli(const std::string& args) {
  std::string cmd = std::string(EDW_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  Run r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  r.code = WEXITSTATUS(pclose(p));
  return r;
}

std::string corpus(const std::string& rel) { return std::string(EDW_CORPUS) + "/" + rel; }

std::string temp_file(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / ("edw_cli_" + name);
  std::ofstream(path) << text;
  return path.string();
}

void collect_p(const nlohmann::json& j, std::vector<double>& out) {
  if (j.is_object()) {
    for (auto& [k, v] : j.items()) {
      if (k == "p" && v.is_number()) out.push_back(v.get<double>());
      else if (k == "p" && v.is_array() && v.size() == 2 && v[0].is_number()) {
        out.push_back(v[0].get<double>());
        out.push_back(v[1].get<double>());
      } else {
        collect_p(v, out);
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect_p(v, out);
  }
}

}  // namespace

TEST_CASE("zero steps print nothing in stream mode and the start in board mode") {
  Run r = cli("run " + corpus("chess/chess_solitaire.edw") + " --steps 0");
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  Run b = cli("run " + corpus("chess/chess_solitaire.edw") + " --steps 0 --render board");
  CHECK(b.code == 0);
  CHECK(b.out.find("8  r  n  b  q  k  b  n  r") != std::string::npos);
  CHECK(b.out.find("1 [R] N  B  Q  K  B  N  R") != std::string::npos);
}

TEST_CASE("stream rows line up") {
  Run r = cli("run " + corpus("chess/chess_solitaire.edw") + " --steps 5 --seed 4");
  CHECK(r.code == 0);
  std::vector<std::string> rows;
  std::size_t at = 0, nl;
  while ((nl = r.out.find('\n', at)) != std::string::npos) {
    rows.push_back(r.out.substr(at, nl - at));
    at = nl + 1;
  }
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.size() == 5);
}

TEST_CASE("jsonl emits one parsable object per step") {
  Run r = cli("run " + corpus("chess/chess_solitaire.edw") + " --steps 4 --render jsonl");
  CHECK(r.code == 0);
  std::size_t lines = 0, at = 0, nl;
  while ((nl = r.out.find('\n', at)) != std::string::npos) {
    auto j = nlohmann::json::parse(r.out.substr(at, nl - at));
    CHECK(j.at("t").get<int>() == static_cast<int>(lines));
    CHECK(j.contains("mask"));
    ++lines;
    at = nl + 1;
  }
  CHECK(lines == 4);
}

TEST_CASE("runs are reproducible from the seed") {
  std::string base = "run " + corpus("chess/chess_solitaire.edw") + " --steps 300 --seed ";
  CHECK(cli(base + "5").out == cli(base + "5").out);
  CHECK(cli(base + "5").out != cli(base + "6").out);
}

TEST_CASE("validation errors exit with an input error and a position") {
  std::string bad = temp_file("bad.edw", testutil::kAlphabet +
                                             "model m kind pattern {\n  states s\n  initial s\n  arrow s -> ghost : always\n}\n");
  Run r = cli("validate " + bad);
  CHECK(r.code == 1);
  CHECK(r.out.find(bad + ":9:3: error:") != std::string::npos);
  CHECK(r.out.find("ghost") != std::string::npos);
}

TEST_CASE("warnings alone exit cleanly") {
  std::string warn = temp_file("warn.edw", testutil::kAlphabet +
                                               "model m kind pattern {\n  states s t u\n  initial s\n  arrow s -> t : action=a\n"
                                               "  trace s never action=b\n}\n");
  Run r = cli("validate " + warn);
  CHECK(r.code == 0);
  CHECK(r.out.find("warning: model m: state u is unreachable") != std::string::npos);
  CHECK(cli("validate " + corpus("chess/chess_solitaire.edw")).out.empty());
}

TEST_CASE("input errors exit with one") {
  CHECK(cli("run /nonexistent/world.edw").code == 1);
  CHECK(cli("bogus").code == 1);
  CHECK(cli("run " + corpus("chess/chess_solitaire.edw") + " --render sideways").code == 1);
  CHECK(cli("compile-tm " + temp_file("bad.tm", "q0: 0 -> w1,R,zz ; 1 -> w1,R,H\n")).code == 1);
}

TEST_CASE("impossible evidence is a fault") {
  Run r = cli("belief " + corpus("beliefs/world12.bw") + " " + corpus("beliefs/world12_impossible.script"));
  CHECK(r.code == 2);
  CHECK(r.out.find("impossible") != std::string::npos);
}

TEST_CASE("deterministic rotation reports certainty at every step") {
  Run r = cli("belief " + corpus("beliefs/perm4.bw") + " " + corpus("beliefs/perm4.script"));
  REQUIRE(r.code == 0);
  std::vector<double> ps;
  collect_p(nlohmann::json::parse(r.out), ps);
  REQUIRE(ps.size() >= 5);
  for (double p : ps) CHECK(p == doctest::Approx(1));
}

TEST_CASE("compiled machine output matches the corpus") {
  Run r = cli("compile-tm " + corpus("tm/busy_beaver3.tm"));
  CHECK(r.code == 0);
  CHECK(r.out == read_file(corpus("tm/busy_beaver3.edw")));
  Run v = cli("compile-tm " + corpus("tm/busy_beaver3.tm") + " --verify 20");
  CHECK(v.code == 0);
  CHECK(v.out.find("verified 14 machine steps") != std::string::npos);
  CHECK(cli("chess").out == read_file(corpus("chess/chess_solitaire.edw")));
}

TEST_CASE("stream rendering uses dots for nil and the idle action") {
  SymbolAlphabets al;
  StreamLog log(3);
  log[0].observation = 0;
  log[0].mask = 0;
  log[0].action = 3;
  log[1].observation = kUndef;
  log[1].mask = 0b0110;
  log[1].action = 0;
  log[2].observation = 1;
  log[2].mask = 0b0010;
  log[2].action = 1;
  std::string s = render_stream(log, al);
  // The first row shows the observation each action was chosen after.
  CHECK(s == "..*\n062\n-.a\n");
  CHECK(render_stream({}, al).empty());
  CHECK(render_stream(log, al, 2) == ".*\n62\n.a\n");
}
