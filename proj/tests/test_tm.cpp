#include <doctest.h>

#include <random>

#include "edw/tm.hpp"
#include "edw/worldlang.hpp"
#include "test_util.hpp"

using namespace edw;

namespace {

TMSpec corpus_tm(const std::string& name) { return parse_tm(read_file(EDW_CORPUS "/tm/" + name + ".tm")); }

std::size_t ones(const TMConfig& c) { return c.tape.size(); }

}  // namespace

TEST_CASE("machine tables parse with comments") {
  TMSpec s = corpus_tm("unary_increment");
  REQUIRE(s.commands.size() == 2);
  CHECK(s.commands[0].name == "q0");
  CHECK(s.commands[0].on[0] == TMBranch{1, -1, 1});
  CHECK(s.commands[1].on[0] == TMBranch{0, 1, kHalt});
  CHECK(s.command_count() == 3);
  CHECK(parse_tm(format_tm(s)) == s);
}

TEST_CASE("malformed tables name the offending line") {
  auto msg = [](const std::string& text) {
    try {
      parse_tm(text);
    } catch (const CompileError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg("q0: 0 -> w1,R,q0 ; 1 -> w1,R,H\nq1: 0 -> w2,R,H ; 1 -> w1,R,H\n").find("line 2") != std::string::npos);
  CHECK(msg("q0: 0 -> w1,R,zz ; 1 -> w1,R,H\n").find("unknown command zz") != std::string::npos);
  CHECK(msg("q0: 0 -> w1,R,H ; 1 -> w1,R,H\nq0: 0 -> w1,R,H ; 1 -> w1,R,H\n").find("twice") != std::string::npos);
  CHECK(msg("H: 0 -> w1,R,H ; 1 -> w1,R,H\n").find("reserved") != std::string::npos);
  CHECK_FALSE(msg("# nothing\n").empty());
  CHECK_THROWS_AS(tape_config("10x"), ArgumentError);
}

TEST_CASE("busy beaver halts after fourteen steps with six ones") {
  TMSpec s = corpus_tm("busy_beaver3");
  CHECK(steps_to_halt(s, {}, 1000) == 14);
  TMConfig end = simulate_tm(s, {}, 1000);
  CHECK(end.halted());
  CHECK(ones(end) == 6);
  CHECK(simulate_tm(s, {}, 13).command != kHalt);
}

TEST_CASE("tape strings") {
  TMConfig c = tape_config("1101", 2);
  CHECK(c.head == 2);
  CHECK(c.tape.size() == 3);
  CHECK(tape_string(c) == "1101");
  CHECK(tape_string({}).empty());
}

TEST_CASE("unary increment compiles to four states per command") {
  TMSpec s = corpus_tm("unary_increment");
  WorldDescription wd = compile_tm(s, tape_config("111"));
  const auto& m = wd.models[static_cast<std::size_t>(wd.model_index("machine"))];
  CHECK(m.states.size() == 12);
  CHECK(wd.models[static_cast<std::size_t>(wd.model_index("head"))].kind == ModelKind::Counter);
  CHECK(serialize_world(wd) == read_file(EDW_CORPUS "/tm/unary_increment.edw"));
}

TEST_CASE("compiled machines track the reference simulator") {
  for (const char* name : {"unary_increment", "binary_successor", "busy_beaver3", "looping"}) {
    TMSpec s = corpus_tm(name);
    for (const char* input : {"", "1", "111", "1011"}) {
      CosimReport r = cosimulate(s, tape_config(input), 60);
      CHECK_MESSAGE(r.ok, name << " on " << input << ": " << r.message);
    }
  }
}

TEST_CASE("the unary machine appends one and returns") {
  TMSpec s = corpus_tm("unary_increment");
  TMConfig end = simulate_tm(s, tape_config("111"), 100);
  CHECK(end.halted());
  CHECK(ones(end) == 4);
  CHECK(end.head == 0);
}

TEST_CASE("miswired worlds diverge and are reported") {
  TMSpec s = corpus_tm("unary_increment");
  TMConfig init = tape_config("111");
  std::string text = serialize_world(compile_tm(s, init));
  const std::string good = "arrow q0.m1 -> q0.r";
  auto at = text.find(good);
  REQUIRE(at != std::string::npos);
  std::string bad = text;
  bad.replace(at, good.size(), "arrow q0.m1 -> q1.r");
  auto r = parse_world(bad);
  REQUIRE(r.world);
  CosimReport rep = cosimulate_world(s, *r.world, init, 20);
  CHECK_FALSE(rep.ok);
  CHECK(rep.divergence >= 1);
  CHECK_FALSE(rep.message.empty());
}

TEST_CASE("zero steps compare only the start") {
  TMSpec s = corpus_tm("busy_beaver3");
  CosimReport r = cosimulate(s, {}, 0);
  CHECK(r.ok);
  CHECK(r.steps == 0);
}

TEST_CASE("property: random machines cosimulate") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    TMSpec s;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int q = 0; q < n; ++q) {
      TMCommand c;
      c.name = "s" + std::to_string(q);
      for (auto& br : c.on) {
        br.write = static_cast<int>(rng() % 2);
        br.dir = rng() % 2 ? 1 : -1;
        int nx = static_cast<int>(rng() % static_cast<unsigned>(n + 1));
        br.next = nx == n ? kHalt : nx;
      }
      s.commands.push_back(c);
    }
    CHECK(parse_tm(format_tm(s)) == s);
    std::string bits;
    for (int i = static_cast<int>(rng() % 6); i > 0; --i) bits += rng() % 2 ? '1' : '0';
    CosimReport r = cosimulate(s, tape_config(bits), 30);
    CHECK_MESSAGE(r.ok, format_tm(s) << r.message);
  }
}
