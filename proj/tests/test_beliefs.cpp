#include <doctest.h>

#include <json.hpp>
#include <numeric>
#include <random>

#include "edw/belief_io.hpp"
#include "edw/beliefs.hpp"
#include "edw/errors.hpp"
#include "edw/worldlang.hpp"
#include "test_util.hpp"

using namespace edw;

namespace {

BeliefWorld corpus_bw(const std::string& name) { return load_belief_world(EDW_CORPUS "/beliefs/" + name); }

const Question& question(const BeliefWorld& bw, const std::string& id) {
  for (const auto& q : bw.questions)
    if (q.id == id) return q;
  throw std::runtime_error("no question " + id);
}

Answer exact(const std::string& q, std::vector<double> p) {
  Answer a{q, {}};
  for (double x : p) a.p.push_back(Interval::point(x));
  return a;
}

// Brute-force posterior over the blocks of `n` after (a, v), starting from
// the prior reweighted by an exact answer over the blocks of `q`.
std::vector<double> bayes(const FiniteWorld& w, const Question& q, const std::vector<double>& aq, int a, int v,
                          const Question& n) {
  std::vector<double> mass(q.size(), 0.0);
  for (std::size_t s = 0; s < w.states.size(); ++s) mass[static_cast<std::size_t>(q.block_of[s])] += w.prior[s];
  std::vector<double> out(n.size(), 0.0);
  double total = 0;
  for (std::size_t s = 0; s < w.states.size(); ++s) {
    std::size_t b = static_cast<std::size_t>(q.block_of[s]);
    if (mass[b] == 0) continue;
    double ws = w.prior[s] * aq[b] / mass[b];
    auto st = w.f1(static_cast<int>(s), a);
    if (st.obs != v) continue;
    out[static_cast<std::size_t>(n.block_of[static_cast<std::size_t>(st.next)])] += ws;
    total += ws;
  }
  for (double& x : out) x /= total;
  return out;
}

}  // namespace

TEST_CASE("factors divide the answer by the prior mass") {
  FiniteWorld w;
  w.states = {"s0", "s1"};
  w.actions = {"a"};
  w.observations = {"x"};
  w.prior = {0.5, 0.5};
  w.table = {{{0, 0}}, {{1, 0}}};
  Question q = finest_question(w);
  auto f = factors_q(prior_answer(w, q), q, w);
  CHECK(f[0] == Interval::point(1));
  CHECK(f[1] == Interval::point(1));
  f = factors_q(deterministic_answer(q, 0), q, w);
  CHECK(f[0] == Interval::point(2));
  CHECK(f[1] == Interval::point(0));
}

TEST_CASE("interval factors use the upper prior bound") {
  FiniteWorld w;
  w.states = {"s0", "s1", "s2", "s3"};
  w.actions = {"a"};
  w.observations = {"x"};
  w.prior = {0.25, 0.25, 0.25, 0.25};
  w.table.assign(4, {{0, 0}});
  Question q = make_question(w, "Q", {{0}, {1, 2, 3}});
  Answer a{"Q", {Interval::unknown(), Interval::unknown()}};
  auto f = factors_q(a, q, w);
  CHECK(f[0].lo == doctest::Approx(0));
  CHECK(f[0].hi == doctest::Approx(4));
  CHECK(a.dont_know());
  CHECK_FALSE(a.exact());
}

TEST_CASE("answers classify themselves") {
  Answer d = exact("Q", {0, 1, 0});
  CHECK(d.deterministic());
  CHECK(d.exact());
  CHECK(d.sum_lo() == doctest::Approx(1));
  CHECK_FALSE(exact("Q", {0.5, 0.5, 0}).deterministic());
  CHECK(hull({0.1, 0.2}, {0.4, 0.5}) == Interval{0.1, 0.5});
}

TEST_CASE("toy world predictions and updates") {
  BeliefWorld bw = corpus_bw("toy3.bw");
  const FiniteWorld& w = bw.world;
  const Question& q = question(bw, "Q");
  Answer aq = bw.answer0.front();
  const int a1 = w.action_index("a1"), a2 = w.action_index("a2");
  const int x = w.observation_index("x"), y = w.observation_index("y"), un = w.observation_index("undef");
  auto p = predict(aq, q, w, a1);
  CHECK(p[static_cast<std::size_t>(x)].mid() == doctest::Approx(0.75));
  CHECK(p[static_cast<std::size_t>(y)].mid() == doctest::Approx(0.25));
  CHECK(p[static_cast<std::size_t>(un)].mid() == doctest::Approx(0));
  Update u = update_f5(aq, q, a1, x, q, w);
  CHECK(u.p.mid() == doctest::Approx(0.75));
  CHECK(u.answer.p[0].mid() == doctest::Approx(0));
  CHECK(u.answer.p[1].mid() == doctest::Approx(1));
  // s2 has no a2 transition, so undef keeps it in place.
  u = update_f5(aq, q, a2, un, q, w);
  CHECK(u.p.mid() == doctest::Approx(0.25));
  CHECK(u.answer.deterministic());
  CHECK(u.answer.p[1].mid() == doctest::Approx(1));
}

TEST_CASE("image of a set after an action and an observation") {
  BeliefWorld bw = corpus_bw("toy3.bw");
  const FiniteWorld& w = bw.world;
  StateSet none(3, 0), m{1, 1, 0};
  CHECK(image_f2(w, none, 0, 0) == none);
  CHECK(image_f2(w, m, w.action_index("a1"), w.observation_index("x")) == StateSet{0, 1, 1});
  CHECK(image_f2(w, m, w.action_index("a1"), w.observation_index("y")) == none);
  CHECK(outcome_of(w, w.action_index("a2")) == std::vector<int>{1, 1, w.undef()});
}

TEST_CASE("an observation the answer rules out is impossible evidence") {
  BeliefWorld bw = corpus_bw("toy3.bw");
  const FiniteWorld& w = bw.world;
  const Question& q = question(bw, "Q");
  CHECK_THROWS_AS(update_f5(deterministic_answer(q, 0), q, w.action_index("a1"), w.observation_index("y"), q, w),
                  ImpossibleEvidence);
  BeliefScript bad = load_belief_script(EDW_CORPUS "/beliefs/world12_impossible.script");
  CHECK_THROWS_AS(belief_report(corpus_bw("world12.bw"), bad), ImpossibleEvidence);
}

TEST_CASE("same partition gives a diagonal k") {
  FiniteWorld w;
  w.states = {"s0", "s1"};
  w.actions = {"a"};
  w.observations = {"x"};
  w.prior = {0.5, 0.5};
  w.table = {{{0, 0}}, {{1, 0}}};
  Question b = finest_question(w);
  Matrix k = joint_k(b, b, w);
  CHECK(k == Matrix{{2, 0}, {0, 2}});
  // Deterministic answers on a zero cell cannot hold together.
  CHECK_THROWS_AS(fit_t(deterministic_answer(b, 0), deterministic_answer(b, 1), k), ImpossibleAnswer);
  FitResult f = fit_t(deterministic_answer(b, 0), deterministic_answer(b, 0), k);
  CHECK(f.converged);
  CHECK(f.joint[0][0] == doctest::Approx(1));
  CHECK(f.t[0][1] == 0);
}

TEST_CASE("independent questions have unit k and unit t") {
  BeliefWorld bw = corpus_bw("indep4.bw");
  REQUIRE(bw.questions.size() == 2);
  Matrix k = joint_k(bw.questions[0], bw.questions[1], bw.world);
  for (const auto& row : k)
    for (double v : row) CHECK(v == doctest::Approx(1));
  Answer ab = exact(bw.questions[0].id, {0.3, 0.7});
  Answer ac = exact(bw.questions[1].id, {0.6, 0.4});
  FitResult f = fit_t(ab, ac, k);
  CHECK(f.converged);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t s = 0; s < 2; ++s) {
      CHECK(f.t[r][s] == doctest::Approx(1));
      CHECK(f.joint[r][s] == doctest::Approx(ab.p[r].lo * ac.p[s].lo));
    }
}

TEST_CASE("a deterministic world branches once with probability one") {
  BeliefWorld bw = corpus_bw("perm4.bw");
  auto br = branch_f7(bw.answer0, 0, bw.world, bw.questions);
  REQUIRE(br.size() == 1);
  CHECK(br[0].p == Interval::point(1));
  CHECK(br[0].answers.front().deterministic());
}

TEST_CASE("branch probabilities sum to one on the twelve-state world") {
  BeliefWorld bw = corpus_bw("world12.bw");
  for (int a = 0; a < static_cast<int>(bw.world.actions.size()); ++a) {
    auto br = branch_f7(bw.answer0, a, bw.world, bw.questions);
    double total = 0;
    for (const auto& b : br) total += b.p.mid();
    CHECK(total == doctest::Approx(1).epsilon(1e-12));
  }
}

TEST_CASE("relevance separates past and future indistinguishability") {
  FiniteWorld w;
  w.states = {"s0", "s1", "s2"};
  w.actions = {"a"};
  w.observations = {"x", "y"};
  w.prior = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  w.table = {{{2, 0}}, {{2, 0}}, {{2, 1}}};
  w.check();
  Relevance r = relevance(w, finest_question(w));
  using P = std::pair<int, int>;
  CHECK(r.past == std::vector<P>{{0, 1}});
  CHECK(r.future == std::vector<P>{{0, 1}});
}

TEST_CASE("belief worlds and reports") {
  BeliefWorld bw = corpus_bw("perm4.bw");
  CHECK(serialize_belief_world(parse_belief_world(serialize_belief_world(bw))) == serialize_belief_world(bw));
  std::string rep = belief_report(bw, load_belief_script(EDW_CORPUS "/beliefs/perm4.script"));
  CHECK(rep == read_file(EDW_CORPUS "/beliefs/perm4.report.json"));
  auto j = nlohmann::json::parse(rep);
  CHECK(j.dump().find("\"p\"") != std::string::npos);
  CHECK_THROWS_AS(parse_belief_world("states s0\nactions a\nobservations x\nprior 0.5\n"), Error);
  CHECK_THROWS_AS(parse_belief_script("only-one-token\n"), Error);
}

TEST_CASE("property: exact updates match brute-force Bayes") {
  BeliefWorld bw = corpus_bw("world12.bw");
  const FiniteWorld& w = bw.world;
  Question fine = finest_question(w);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Question& q = bw.questions[rng() % bw.questions.size()];
    std::vector<double> p(q.size());
    for (double& x : p) x = u(rng);
    double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= s;
    Answer aq = exact(q.id, p);
    int a = static_cast<int>(rng() % w.actions.size());
    auto pred = predict(aq, q, w, a);
    for (int v = 0; v < static_cast<int>(w.n_obs()); ++v) {
      if (pred[static_cast<std::size_t>(v)].hi <= 0) continue;
      for (const Question* n : std::initializer_list<const Question*>{&q, &fine}) {
        Update up = update_f5(aq, q, a, v, *n, w);
        auto want = bayes(w, q, p, a, v, *n);
        for (std::size_t j = 0; j < want.size(); ++j) CHECK(up.answer.p[j].mid() == doctest::Approx(want[j]).epsilon(1e-9));
        CHECK(up.answer.sum_lo() == doctest::Approx(1).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("property: interval updates contain every exact selection") {
  BeliefWorld bw = corpus_bw("doors6.bw");
  const FiniteWorld& w = bw.world;
  const Question& q = bw.questions.front();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Answer ai{q.id, {}};
    std::vector<double> centre(q.size());
    for (double& c : centre) c = 0.1 + u(rng);
    double s = std::accumulate(centre.begin(), centre.end(), 0.0);
    for (double& c : centre) {
      c /= s;
      ai.p.push_back({std::max(0.0, c - 0.05), std::min(1.0, c + 0.05)});
    }
    int a = static_cast<int>(rng() % w.actions.size());
    for (int v = 0; v < static_cast<int>(w.n_obs()); ++v) {
      Update iv;
      try {
        iv = update_f5(ai, q, a, v, q, w);
      } catch (const ImpossibleEvidence&) {
        continue;
      }
      for (int draw = 0; draw < 100; ++draw) {
        // Exact selection inside the intervals: blend toward the centre.
        std::vector<double> p(q.size());
        double t = u(rng);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = centre[i] + t * (u(rng) - 0.5) * 0.02;
        double z = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& x : p) x /= z;
        bool inside = true;
        for (std::size_t i = 0; i < p.size(); ++i) inside = inside && ai.p[i].contains(p[i]);
        if (!inside) continue;
        Update ex;
        try {
          ex = update_f5(exact(q.id, p), q, a, v, q, w);
        } catch (const ImpossibleEvidence&) {
          continue;
        }
        CHECK(iv.p.contains(ex.p.lo, 1e-9));
        for (std::size_t j = 0; j < q.size(); ++j) CHECK(iv.answer.p[j].contains(ex.answer.p[j].lo, 1e-9));
      }
    }
  }
}
