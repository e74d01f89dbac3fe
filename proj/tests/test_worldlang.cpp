#include <doctest.h>

#include <random>
#include <sstream>

#include "edw/chess.hpp"
#include "edw/tm.hpp"
#include "edw/worldlang.hpp"
#include "test_util.hpp"

using namespace edw;

namespace {

bool has_message(const std::vector<Diagnostic>& ds, const std::string& part, Diagnostic::Severity sev) {
  for (const auto& d : ds)
    if (d.severity == sev && d.message.find(part) != std::string::npos) return true;
  return false;
}

std::size_t count(const std::vector<Diagnostic>& ds, Diagnostic::Severity sev) {
  std::size_t n = 0;
  for (const auto& d : ds) n += d.severity == sev;
  return n;
}

}  // namespace

TEST_CASE("minimal world with one state and an always arrow") {
  auto r = parse_world(testutil::kAlphabet + "model m kind pattern {\n  states s\n  initial s\n  arrow s -> s : always\n}\n");
  REQUIRE(r.world);
  CHECK(r.world->models.size() == 1);
  CHECK(r.world->models[0].arrows.size() == 1);
}

TEST_CASE("bundled chess world counts") {
  auto wd = load_world(EDW_CORPUS "/chess/chess_solitaire.edw");
  std::size_t patterns = 0, algorithms = 0, properties = 0, imagined = 0;
  for (const auto& m : wd.models) {
    if (m.imagined) {
      ++imagined;
      continue;
    }
    patterns += m.kind == ModelKind::Pattern;
    algorithms += m.kind == ModelKind::Algorithm;
    properties += m.kind == ModelKind::Property;
  }
  CHECK(patterns == 5);
  CHECK(algorithms == 9);
  CHECK(properties == 10);
  CHECK(imagined == 1);
  CHECK(wd.traces.size() == 2);
  CHECK(wd.rules.size() == 7);
}

TEST_CASE("arrow to an undeclared state is a reference error with a position") {
  auto r = parse_world(testutil::kAlphabet +
                       "model m kind pattern {\n  states s t\n  initial s\n  arrow s -> ghost : always\n  trace s never action=a\n}\n");
  CHECK_FALSE(r.world);
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(has_message(r.diagnostics, "ghost", Diagnostic::Severity::Error));
  for (const auto& d : r.diagnostics) CHECK(d.pos.line > 0);
}

TEST_CASE("syntax errors name the position and what was expected") {
  auto r = parse_world(testutil::kAlphabet + "model m kind pattern {\n  states s\n  arrow s s : always\n}\n");
  CHECK_FALSE(r.world);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].pos.line == 8);
  CHECK(r.diagnostics[0].message.find("expected") != std::string::npos);
  std::string f = format(r.diagnostics[0], "w.edw");
  CHECK(f.rfind("w.edw:8:", 0) == 0);
  CHECK(f.find("error:") != std::string::npos);
}

TEST_CASE("alphabets need four distinct symbols each") {
  auto r = parse_world("alphabet {\n  actions 0 a b\n  observations 0 x y z\n  undef undef\n}\n");
  CHECK_FALSE(r.world);
  auto r2 = parse_world("alphabet {\n  actions 0 a b c\n  observations 0 x y undef\n  undef undef\n}\n");
  CHECK_FALSE(r2.world);
}

TEST_CASE("serializing the chess world is idempotent") {
  std::string text = read_file(EDW_CORPUS "/chess/chess_solitaire.edw");
  auto a = parse_world(text);
  REQUIRE(a.world);
  std::string s1 = serialize_world(*a.world);
  auto b = parse_world(s1);
  REQUIRE(b.world);
  std::string s2 = serialize_world(*b.world);
  CHECK(s1 == s2);
  CHECK(s1 == text);
  CHECK(*a.world == *b.world);
}

TEST_CASE("empty world serializes to the alphabet block only") {
  auto r = parse_world(testutil::kAlphabet);
  REQUIRE(r.world);
  CHECK(serialize_world(*r.world) == testutil::kAlphabet);
}

TEST_CASE("compiled machine round-trips losslessly") {
  auto spec = parse_tm(read_file(EDW_CORPUS "/tm/binary_successor.tm"));
  auto wd = compile_tm(spec, tape_config("1011", 3));
  auto r = parse_world(serialize_world(wd));
  REQUIRE(r.world);
  CHECK(*r.world == wd);
}

TEST_CASE("validator warnings") {
  auto unreachable = parse_world(testutil::kAlphabet +
                                 "model m kind pattern {\n  states s t u\n  initial s\n  arrow s -> t : action=a\n  trace s never action=b\n}\n");
  REQUIRE(unreachable.world);
  CHECK(has_message(unreachable.diagnostics, "state u is unreachable", Diagnostic::Severity::Warning));
  CHECK(count(unreachable.diagnostics, Diagnostic::Severity::Warning) == 1);

  auto traceless = parse_world(testutil::kAlphabet + "model m kind pattern {\n  states s t\n  initial s\n  arrow s -> t : always\n  arrow t -> s : always\n}\n");
  REQUIRE(traceless.world);
  CHECK(has_message(traceless.diagnostics, "no permanent trace", Diagnostic::Severity::Warning));

  auto single = parse_world(testutil::kAlphabet + "model m kind pattern {\n  states s\n  initial s\n  trace s never action=a\n}\n");
  REQUIRE(single.world);
  CHECK(has_message(single.diagnostics, "single possible answer", Diagnostic::Severity::Warning));

  auto no_exit = parse_world(testutil::kAlphabet + "model m kind algorithm {\n  states s t\n  entry s\n  arrow s -> t : always\n}\n");
  REQUIRE(no_exit.world);
  CHECK(has_message(no_exit.diagnostics, "no exit", Diagnostic::Severity::Warning));
}

TEST_CASE("corpus worlds validate without diagnostics") {
  for (std::string f : {"/chess/chess_solitaire.edw", "/chess/chess_two_agent.edw", "/tm/unary_increment.edw",
                        "/tm/binary_successor.edw", "/tm/busy_beaver3.edw"}) {
    auto r = parse_world(read_file(EDW_CORPUS + f));
    REQUIRE(r.world);
    CHECK_MESSAGE(r.diagnostics.empty(), f);
  }
}

TEST_CASE("a machine that never halts warns about its unreachable halting block") {
  auto r = parse_world(read_file(EDW_CORPUS "/tm/looping.edw"));
  REQUIRE(r.world);
  CHECK(r.diagnostics.size() == 4);
  for (const auto& d : r.diagnostics) {
    CHECK_FALSE(d.error());
    CHECK(d.message.find("state H.") != std::string::npos);
  }
}

TEST_CASE("duplicate model ids are rejected") {
  auto r = parse_world(testutil::kAlphabet +
                       "model m kind pattern {\n  states s\n  initial s\n}\nmodel m kind pattern {\n  states s\n  initial s\n}\n");
  CHECK_FALSE(r.world);
}

TEST_CASE("load_world reports diagnostics as a description error") {
  CHECK_THROWS_AS(load_world(EDW_CORPUS "/does_not_exist.edw"), Error);
}

namespace {

std::string random_world(std::mt19937_64& rng) {
  std::ostringstream os;
  os << testutil::kAlphabet;
  int nm = 1 + static_cast<int>(rng() % 10);
  os << "markers m1 m2 m3\nregister r\n";
  os << "event go = action=a & !obs=x\n";
  std::vector<std::pair<std::string, int>> finite;
  const char* lits[] = {"action=0", "action=a", "!action=b", "obs=y", "always", "never", "random[0.25,0.5]", "go"};
  for (int i = 0; i < nm; ++i) {
    std::string id = "m" + std::to_string(i);
    int n = 1 + static_cast<int>(rng() % 12);
    bool alg = rng() % 4 == 0;
    os << "model " << id << " kind " << (alg ? "algorithm" : "pattern") << " {\n  states";
    for (int s = 0; s < n; ++s) os << " s" << s;
    os << "\n";
    if (alg)
      os << "  entry s0\n  exit s" << n - 1 << "\n";
    else
      os << "  initial s0\n";
    for (int s = 0; s < n; ++s)
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) {
        os << "  arrow s" << s << " -> s" << rng() % n << " : " << lits[rng() % 8];
        if (rng() % 2 && !finite.empty()) {
          auto& [fm, fn] = finite[rng() % finite.size()];
          os << " & in(" << fm << ",s" << rng() % fn << ")";
        }
        os << "\n";
      }
    for (int s = 0; s < n; ++s)
      if (rng() % 3 == 0) os << "  trace s" << s << (rng() % 2 ? " must " : " never ") << lits[rng() % 8] << "\n";
    os << "}\n";
    if (!alg) finite.emplace_back(id, n);
  }
  if (!finite.empty()) {
    auto& [fm, fn] = finite[rng() % finite.size()];
    os << "movtrace t over " << fm << " {\n";
    for (int s = 0; s < fn; ++s)
      if (rng() % 2) os << "  cell s" << s << " : m" << 1 + rng() % 3 << "\n";
    os << "}\n";
    os << "rule r1 priority 1 {\n  when action=a & has(t,m1)\n  add t@cur m2\n  remember r t@cur\n}\n";
    os << "rule r2 priority 2 forbid {\n  when action=b & has(t,m3)\n}\n";
  }
  return os.str();
}

}  // namespace

TEST_CASE("property: random descriptions round-trip through the canonical form") {
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 200; ++i) {
    std::string text = random_world(rng);
    auto a = parse_world(text);
    REQUIRE_MESSAGE(a.world, text);
    std::string s1 = serialize_world(*a.world);
    auto b = parse_world(s1);
    REQUIRE_MESSAGE(b.world, s1);
    CHECK(*a.world == *b.world);
    CHECK(serialize_world(*b.world) == s1);
    for (const auto& d : a.diagnostics) CHECK(d.pos.line > 0);
  }
}
