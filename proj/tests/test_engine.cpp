#include <doctest.h>

#include <random>

#include "edw/chess.hpp"
#include "edw/engine.hpp"
#include "edw/tm.hpp"
#include "harness.hpp"
#include "test_util.hpp"

using namespace edw;

namespace {

constexpr int kA = 1;
constexpr int kB = 2;

Engine& solitaire() {
  static Engine e(build_chess({}));
  return e;
}

int first_agent(const Engine& e) { return e.acting_agents().front(); }

const std::string kSearchWorld = R"(
model dream kind algorithm {
  states s1 s2
  entry s1
  exit s2
  arrow s1 -> s2 : never
}

model done kind algorithm {
  states s1
  entry s1
  exit s1
}

model walk kind algorithm {
  states s1 s2 s3 s4
  entry s1
  exit s4
  arrow s1 -> s2 : action=a
  arrow s2 -> s3 : action=a
  arrow s3 -> s4 : action=a
}

model clock kind pattern {
  states p
  initial p
  trace p never action=c
}
)";

}  // namespace

TEST_CASE("chess world starts from the standard position") {
  Engine& e = solitaire();
  WorldState ws = e.init(0);
  const int g = first_agent(e);
  OracleBoard b = oracle_from_trace(e.trace(ws, g, "board"), e.world(), Color::White);
  CHECK(b == oracle_initial());
  for (const auto& c : b.cells)
    if (c.piece != Piece::None) CHECK_FALSE(c.moved);
  CHECK(chess_phase(e, ws, g) == 1);
  CHECK(chess_gaze(e, ws, g) == Square{1, 1});
  CHECK_FALSE(chess_lifted(e, ws, g));
  CHECK(ws.step_index == 0);
}

TEST_CASE("an empty world has no active sets") {
  Engine e(testutil::world(""));
  WorldState ws = e.init(0);
  CHECK(ws.active.empty());
  CHECK(ws.traces.empty());
}

TEST_CASE("machine world starts with its input on the tape") {
  TMSpec spec = parse_tm(read_file(EDW_CORPUS "/tm/unary_increment.tm"));
  TMConfig init = tape_config("1101");
  Engine e(compile_tm(spec, init));
  WorldState ws = e.init(0);
  const auto& tape = e.trace(ws, 0, "tape");
  CHECK(markers_at(tape, 0).size() == 1);
  CHECK(markers_at(tape, 1).size() == 1);
  CHECK(markers_at(tape, 2).empty());
  CHECK(markers_at(tape, 3).size() == 1);
  CHECK(markers_at(tape, 4).empty());
  CHECK(e.active(ws, 0, "head") == make_active({0}));
  CHECK(read_config(spec, e, ws) == init);
}

TEST_CASE("phase three on an empty square with nothing lifted forbids both") {
  Engine& e = solitaire();
  WorldState ws = e.init(0);
  const int g = first_agent(e);
  harness::walk_to(e, ws, g, {4, 4});
  REQUIRE(chess_phase(e, ws, g) == 3);
  CHECK(mask_digit(e.forbidden(ws, g)) == 6);
}

TEST_CASE("a forbidden action leaves the world unchanged and observes undef") {
  Engine& e = solitaire();
  WorldState ws = e.init(0);
  const int g = first_agent(e);
  REQUIRE(chess_gaze(e, ws, g).col == 1);
  REQUIRE(((e.forbidden(ws, g) >> kA) & 1) != 0);
  WorldState before = ws;
  StepResult r = e.step(ws, g, kA);
  CHECK(r.undef);
  CHECK(r.observation == kUndef);
  CHECK(r.fired_rules.empty());
  CHECK(ws.same_world(before));
  CHECK_THROWS_AS(e.step(ws, g, 4), ArgumentError);
  CHECK_THROWS_AS(e.step(ws, 7, 0), ArgumentError);
}

TEST_CASE("observation voting") {
  // Symbols: nil, x, y, z.
  CHECK(vote_observation(std::vector<int>{0, 1, 0, 0}) == 1);
  CHECK(vote_observation(std::vector<int>{0, 0, 0, 0}) == 0);
  CHECK(vote_observation(std::vector<int>{0, 1 - 1, 0, 0}) == 0);
  CHECK(vote_observation(std::vector<int>{0, 2, 2, 1}) == 1);
  CHECK(vote_observation(std::vector<int>{0, -1, -2, 1}) == 3);
  CHECK(vote_observation(std::vector<int>{5, 1, 0, 0}) == 0);
}

TEST_CASE("surveillance tells a white knight from a black knight") {
  Engine& e = solitaire();
  const int g = first_agent(e);
  auto watch = [&](Square s) {
    WorldState ws = e.init(0);
    harness::walk_to(e, ws, g, s);
    auto pol = surveillance_policy();
    StreamLog log = run_episode(e, ws, {{g, pol.get()}}, 30);
    std::vector<int> obs;
    for (const auto& en : log) obs.push_back(en.observation);
    // The gaze never moves while watching.
    CHECK(chess_gaze(e, ws, g) == s);
    return obs;
  };
  auto white = watch({2, 1});
  auto black = watch({2, 8});
  CHECK(white.size() == 30);
  CHECK(white != black);
  CHECK(watch({2, 1}) == white);
}

TEST_CASE("executability search explores never events in imagination") {
  Engine e(testutil::world(kSearchWorld));
  WorldState ws = e.init(0);
  const int dream = e.world().model_index("dream");
  CHECK(e.can_execute(ws, 0, dream, 1));
  // Reality cannot take the never arrow, so no reply exists.
  CHECK(e.reply_candidates(ws, 0, dream).empty());
  ReplyOutcome out = e.antagonist_reply(ws, 0, dream, first_chooser());
  CHECK(out.terminal);
  CHECK(out.candidates == 0);
}

TEST_CASE("executability search depth") {
  Engine e(testutil::world(kSearchWorld));
  WorldState ws = e.init(0);
  CHECK(e.can_execute(ws, 0, e.world().model_index("done"), 1));
  const int walk = e.world().model_index("walk");
  CHECK_FALSE(e.can_execute(ws, 0, walk, 2));
  CHECK(e.can_execute(ws, 0, walk, 3));
  CHECK(e.can_execute(ws, 0, walk, 64));
  CHECK_THROWS_AS(e.can_execute(ws, 0, walk, 0), ArgumentError);
  CHECK_THROWS_AS(e.can_execute(ws, 0, e.world().model_index("clock"), 5), ArgumentError);
  CHECK(can_execute(e, ws, 0, "walk", 3));
}

TEST_CASE("capture search agrees with the check oracle and is monotone in depth") {
  Engine e(build_chess({}));
  const int g = first_agent(e);
  const int alg = e.world().model_index("capture_king");
  std::mt19937_64 rng(404);
  int positives = 0, cases = 0;
  while (cases < 40) {
    OracleBoard b = harness::random_position(rng, 40);
    std::vector<std::pair<Square, Square>> moves, unsafe;
    for (int col = 1; col <= 8; ++col)
      for (int row = 1; row <= 8; ++row) {
        Square f{col, row};
        if (b.at(f).piece == Piece::None || b.at(f).color != b.to_move) continue;
        for (Square t : oracle_pseudo_destinations(b, f)) {
          moves.emplace_back(f, t);
          if (oracle_in_check(oracle_apply(b, f, t), b.to_move)) unsafe.emplace_back(f, t);
        }
      }
    if (moves.empty()) continue;
    const auto& pool = (cases % 2 == 0 && !unsafe.empty()) ? unsafe : moves;
    auto [from, to] = pool[rng() % pool.size()];
    WorldState ws = e.init(0);
    harness::install(e, ws, g, b);
    REQUIRE(harness::reach_drop(e, ws, g, from, to));
    bool want = oracle_in_check(oracle_apply(b, from, to), b.to_move);
    CHECK(e.can_execute(ws, g, alg, 64) == want);
    if (want) {
      ++positives;
      bool seen = false;
      for (int d = 1; d <= 64; d += 3) {
        bool got = e.can_execute(ws, g, alg, d);
        if (seen) CHECK(got);
        seen = seen || got;
      }
      CHECK(seen);
    }
    ++cases;
  }
  CHECK(positives > 5);
}

TEST_CASE("twenty black replies after the king's pawn opening") {
  ChessWorldConfig cfg;
  cfg.variant = ChessVariant::TwoAgent;
  Engine e(build_chess(cfg));
  const int white = e.agent_index("white");
  WorldState ws = e.init(0);
  REQUIRE(harness::reach_drop(e, ws, white, {5, 2}, {5, 4}));
  StepResult r = e.step(ws, white, kB);
  CHECK(r.reply_ran);
  CHECK(r.reply_candidates == 20);
  CHECK(r.reply_candidates == oracle_legal_moves(oracle_apply(oracle_initial(), {5, 2}, {5, 4})).size());
}

TEST_CASE("a position with one legal reply gets that reply") {
  ChessWorldConfig cfg;
  cfg.variant = ChessVariant::TwoAgent;
  Engine e(build_chess(cfg));
  const int white = e.agent_index("white");
  e.set_chooser(e.agent_index("black"), first_chooser());
  OracleBoard b;
  b.at({1, 1}) = {Piece::King, Color::White, true};
  b.at({7, 1}) = {Piece::Rook, Color::White, true};
  b.at({8, 8}) = {Piece::King, Color::Black, true};
  b.at({8, 7}) = {Piece::Pawn, Color::Black, true};
  OracleBoard after = oracle_apply(b, {1, 1}, {1, 2});
  after.to_move = Color::Black;
  auto replies = oracle_legal_moves(after);
  REQUIRE(replies.size() == 1);
  WorldState ws = e.init(0);
  harness::install(e, ws, white, b);
  REQUIRE(harness::reach_drop(e, ws, white, {1, 1}, {1, 2}));
  StepResult r = e.step(ws, white, kB);
  CHECK(r.reply_ran);
  CHECK(r.reply_candidates == 1);
  OracleBoard want = oracle_apply(after, replies[0].first, replies[0].second);
  CHECK(oracle_from_trace(e.trace(ws, white, "board"), e.world(), Color::White) == want);
}

TEST_CASE("the searched reply and its replay produce the same board") {
  ChessWorldConfig cfg;
  cfg.variant = ChessVariant::TwoAgent;
  Engine e(build_chess(cfg));
  const int white = e.agent_index("white");
  const int black = e.agent_index("black");
  const int reply = e.world().model_index("black_reply");
  WorldState ws = e.init(0);
  auto cands = e.reply_candidates(ws, black, reply);
  // Black has no pending reply at the start but its algorithm still finds moves.
  REQUIRE(cands.size() == 20);
  for (std::size_t i = 0; i < cands.size(); i += 7) {
    ReplyOutcome out = e.antagonist_reply(ws, black, reply, [i](const std::vector<ReplyCandidate>&) { return i; });
    CHECK(e.trace(out.state, white, "board") == e.trace(cands[i].result, white, "board"));
    CHECK(out.actions == cands[i].actions);
  }
}

TEST_CASE("episodes") {
  Engine& e = solitaire();
  const int g = first_agent(e);
  WorldState ws = e.init(0);
  auto p0 = random_policy(1);
  CHECK(run_episode(e, ws, {{g, p0.get()}}, 0).empty());
  auto run = [&](std::uint64_t seed) {
    WorldState w = e.init(seed);
    auto p = random_policy(seed);
    return run_episode(e, w, {{g, p.get()}}, 50);
  };
  auto a = run(7), b = run(7), c = run(8);
  REQUIRE(a.size() == 50);
  auto same = [](const StreamLog& x, const StreamLog& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].observation != y[i].observation || x[i].mask != y[i].mask || x[i].action != y[i].action ||
          x[i].fired_rules != y[i].fired_rules)
        return false;
    return true;
  };
  CHECK(same(a, b));
  CHECK_FALSE(same(a, c));
  CHECK_THROWS_AS(run_episode(e, ws, {}, 5), ArgumentError);
}

TEST_CASE("property: undef steps are no-ops") {
  Engine& e = solitaire();
  const int g = first_agent(e);
  WorldState ws = e.init(3);
  std::mt19937_64 rng(5);
  std::size_t undefs = 0;
  for (int i = 0; i < 10000; ++i) {
    ActionBits forb = e.forbidden(ws, g);
    int a = static_cast<int>(rng() % 4);
    // Bias towards forbidden actions to exercise the contract.
    if (forb && rng() % 2)
      for (int x = 0; x < kSymbols; ++x)
        if ((forb >> x) & 1) a = x;
    WorldState before = ws;
    StepResult r = e.step(ws, g, a);
    CHECK(r.undef == (((forb >> a) & 1) != 0));
    CHECK(r.undef == (r.observation == kUndef));
    if (r.undef) {
      ++undefs;
      CHECK(ws.same_world(before));
    } else {
      CHECK(ws.step_index == before.step_index + 1);
    }
  }
  CHECK(undefs > 1000);
}

TEST_CASE("property: phase and coordinate laws along a random episode") {
  Engine& e = solitaire();
  const int g = first_agent(e);
  WorldState ws = e.init(9);
  auto pol = random_policy(9);
  for (int i = 0; i < 3000; ++i) {
    ActionBits forb = e.forbidden(ws, g);
    int phase = chess_phase(e, ws, g);
    CHECK(phase == static_cast<int>(ws.step_index % 3) + 1);
    if (phase == 3) {
      int d = mask_digit(forb);
      CHECK((d == 2 || d == 4 || d == 6));
    }
    Square s = chess_gaze(e, ws, g);
    if (!chess_lifted(e, ws, g)) {
      if (phase == 1) {
        CHECK((((forb >> kA) & 1) != 0) == (s.col == 1));
        CHECK((((forb >> kB) & 1) != 0) == (s.col == 8));
      }
      if (phase == 2) {
        CHECK((((forb >> kA) & 1) != 0) == (s.row == 8));
        CHECK((((forb >> kB) & 1) != 0) == (s.row == 1));
      }
    }
    e.step(ws, g, pol->choose({}, forb));
  }
}

TEST_CASE("direct writes are validated") {
  Engine& e = solitaire();
  const int g = first_agent(e);
  WorldState ws = e.init(0);
  CHECK_THROWS_AS(e.set_active(ws, g, "horiz", {}), ArgumentError);
  CHECK_THROWS_AS(e.set_active(ws, g, "horiz", make_active({99})), ArgumentError);
  e.set_active(ws, g, "horiz", make_active({3}));
  CHECK(chess_gaze(e, ws, g).col == 4);
  MovingTraceArray small;
  CHECK_THROWS_AS(e.set_trace(ws, g, "board", small), ArgumentError);
}
