#pragma once

#include <optional>
#include <string>
#include <vector>

namespace edw {

struct Interval {
  double lo = 0;
  double hi = 0;

  static Interval point(double x) { return {x, x}; }
  static Interval unknown() { return {0, 1}; }
  bool exact() const { return lo == hi; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x, double tol = 1e-12) const { return x >= lo - tol && x <= hi + tol; }
  bool operator==(const Interval&) const = default;
};

Interval hull(const Interval& a, const Interval& b);

// Explicit finite world: a partial deterministic transition per (state,
// action). An undefined transition observes `undef` and leaves the state.
struct FiniteWorld {
  struct Step {
    int next = -1;  // -1: undefined
    int obs = -1;
  };
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;  // undef is index observations.size()
  std::vector<double> prior;
  std::vector<std::vector<Step>> table;  // [state][action]

  std::size_t n_obs() const { return observations.size() + 1; }
  int undef() const { return static_cast<int>(observations.size()); }
  // f1: always defined, undef keeps the state.
  Step f1(int s, int a) const;
  int state_index(const std::string& s) const;
  int action_index(const std::string& s) const;
  int observation_index(const std::string& s) const;  // "undef" maps to undef()
  void check() const;
};

struct Question {
  std::string id;
  std::vector<std::string> blocks;
  std::vector<int> block_of;  // per state

  std::size_t size() const { return blocks.size(); }
  int block_index(const std::string& b) const;
};

// Single-question view of a set of states.
Question make_question(const FiniteWorld& w, std::string id, const std::vector<std::vector<int>>& parts,
                       std::vector<std::string> names = {});
// Every state in its own block.
Question finest_question(const FiniteWorld& w);

struct Answer {
  std::string question;
  std::vector<Interval> p;  // per block

  bool exact() const;
  bool deterministic() const;
  bool dont_know() const;
  double sum_lo() const;
  double sum_hi() const;
};

Answer dont_know(const Question& q);
Answer prior_answer(const FiniteWorld& w, const Question& q);
Answer deterministic_answer(const Question& q, int block);

using StateSet = std::vector<char>;

StateSet image_f2(const FiniteWorld& w, const StateSet& m, int a, int v);
// Observation index of each state under `a` (the sets A_i).
std::vector<int> outcome_of(const FiniteWorld& w, int a);
std::vector<double> block_mass(const FiniteWorld& w, const Question& q);

std::vector<Interval> factors_q(const Answer& aq, const Question& q, const FiniteWorld& w);
// One interval per observation, undef last.
std::vector<Interval> predict(const Answer& aq, const Question& q, const FiniteWorld& w, int a);

struct Update {
  Answer answer;
  Interval p;
};

Update update_f5(const Answer& aq, const Question& q, int a, int v, const Question& n, const FiniteWorld& w);

using Matrix = std::vector<std::vector<double>>;

Matrix joint_k(const Question& b, const Question& c, const FiniteWorld& w);

struct FitResult {
  Matrix t;
  Matrix joint;  // P'(B_r and C_s)
  bool converged = false;
  double residual = 0;
  std::size_t iterations = 0;
};

FitResult fit_t(const Answer& ab, const Answer& ac, const Matrix& k, double tol = 1e-9,
                std::size_t max_iter = 10000);

// An answer to each question of a group, in group order.
using GroupAnswer = std::vector<Answer>;

// Weight of every state implied by an exact group answer: the fitted joint
// spread over each cell in proportion to the prior.
std::vector<double> state_weights(const GroupAnswer& ag, const std::vector<Question>& gq, const FiniteWorld& w);

struct Branch {
  GroupAnswer answers;
  int observation = 0;
  Interval p;
};

// Possible outcomes of `a` (p.hi > 0), in observation order with undef last.
std::vector<Branch> branch_f7(const GroupAnswer& ag, int a, const FiniteWorld& w, const std::vector<Question>& gq);

// Posterior over states given exact weights, the oracle-shaped form used by
// branch_f7 for exact group answers.
std::vector<double> push_forward(const FiniteWorld& w, const std::vector<double>& weight, int a, int v);

struct Relevance {
  // Block pairs that no previous answer, action and observation tells apart.
  std::vector<std::pair<int, int>> past;
  // Block pairs with identical observation predictions for every action
  // sequence up to the horizon.
  std::vector<std::pair<int, int>> future;
};

Relevance relevance(const FiniteWorld& w, const Question& q, int horizon = 3);

}  // namespace edw
