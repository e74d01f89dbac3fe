#include "edw/beliefs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "edw/errors.hpp"

namespace edw {

namespace {

constexpr double kTol = 1e-12;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

Interval clamp01(Interval i) { return {clamp01(i.lo), clamp01(i.hi)}; }

// Bounds of sum(x*u)/sum(x*w) over the box lo <= x <= hi with w >= 0. The
// optimum sits at a threshold vertex of the ratio order u/w.
Interval fractional_bounds(const std::vector<double>& u, const std::vector<double>& w,
                           const std::vector<Interval>& box) {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < w.size(); ++r)
    if (w[r] > 0) idx.push_back(r);
  auto best = [&](bool maximize) {
    std::vector<std::size_t> order = idx;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      double rx = u[x] / w[x], ry = u[y] / w[y];
      return maximize ? rx > ry : rx < ry;
    });
    double out = maximize ? -1.0 : 2.0;
    bool any = false;
    for (std::size_t k = 0; k <= order.size(); ++k) {
      double num = 0, den = 0;
      for (std::size_t i = 0; i < order.size(); ++i) {
        double x = i < k ? box[order[i]].hi : box[order[i]].lo;
        num += x * u[order[i]];
        den += x * w[order[i]];
      }
      if (den <= 0) continue;
      double v = num / den;
      out = maximize ? std::max(out, v) : std::min(out, v);
      any = true;
    }
    return any ? out : std::nan("");
  };
  double lo = best(false), hi = best(true);
  if (std::isnan(lo) || std::isnan(hi)) throw ImpossibleEvidence("observation has probability 0");
  return clamp01(Interval{lo, hi});
}

// Partition with per-block answers, used while folding a group pairwise.
struct Cells {
  std::vector<int> block_of;
  std::vector<double> mass;
  std::vector<double> answer;
};

Cells cells_of(const Question& q, const Answer& a, const FiniteWorld& w) {
  Cells c{q.block_of, block_mass(w, q), {}};
  for (const Interval& i : a.p) c.answer.push_back(i.lo);
  return c;
}

Question as_question(const Cells& c) {
  Question q;
  q.block_of = c.block_of;
  q.blocks.resize(c.mass.size());
  return q;
}

Answer as_answer(const Cells& c) {
  Answer a;
  for (double x : c.answer) a.p.push_back(Interval::point(x));
  return a;
}

std::vector<double> weights_of(const Cells& c, const FiniteWorld& w) {
  std::vector<double> out(w.states.size(), 0.0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    int b = c.block_of[s];
    if (c.mass[b] > 0) out[s] = c.answer[b] / c.mass[b] * w.prior[s];
  }
  return out;
}

bool all_exact(const GroupAnswer& ag) {
  return std::all_of(ag.begin(), ag.end(), [](const Answer& a) { return a.exact(); });
}

// Exact distributions inside an interval answer: a grid along each block
// with the remainder pushed into one pivot block.
std::vector<std::vector<double>> exact_selections(const Answer& a, int levels) {
  std::vector<std::vector<double>> out;
  std::size_t m = a.p.size();
  if (a.exact()) {
    std::vector<double> x;
    for (const Interval& i : a.p) x.push_back(i.lo);
    return {x};
  }
  for (std::size_t pivot = 0; pivot < m; ++pivot) {
    for (int l = 0; l < levels; ++l) {
      double lam = levels == 1 ? 0.5 : static_cast<double>(l) / (levels - 1);
      std::vector<double> x(m);
      double rest = 0;
      for (std::size_t r = 0; r < m; ++r) {
        if (r == pivot) continue;
        x[r] = a.p[r].lo + lam * (a.p[r].hi - a.p[r].lo);
        rest += x[r];
      }
      x[pivot] = 1.0 - rest;
      if (x[pivot] < a.p[pivot].lo - kTol || x[pivot] > a.p[pivot].hi + kTol) continue;
      x[pivot] = clamp01(x[pivot]);
      out.push_back(std::move(x));
    }
  }
  return out;
}

}  // namespace

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

FiniteWorld::Step FiniteWorld::f1(int s, int a) const {
  Step st = table[s][a];
  if (st.next < 0) return {s, undef()};
  return st;
}

namespace {
int find_name(const std::vector<std::string>& v, const std::string& s) {
  auto it = std::find(v.begin(), v.end(), s);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}
}  // namespace

int FiniteWorld::state_index(const std::string& s) const { return find_name(states, s); }
int FiniteWorld::action_index(const std::string& s) const { return find_name(actions, s); }
int FiniteWorld::observation_index(const std::string& s) const {
  if (s == "undef") return undef();
  return find_name(observations, s);
}

void FiniteWorld::check() const {
  std::size_t n = states.size();
  if (n == 0) throw ArgumentError("world has no states");
  if (prior.size() != n) throw ArgumentError("prior size differs from state count");
  double sum = 0;
  for (double p : prior) {
    if (p < 0) throw ArgumentError("negative prior weight");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("prior does not sum to 1");
  if (table.size() != n) throw ArgumentError("transition table size differs from state count");
  for (const auto& row : table) {
    if (row.size() != actions.size()) throw ArgumentError("transition row size differs from action count");
    for (const Step& st : row) {
      if (st.next < 0) continue;
      if (st.next >= static_cast<int>(n)) throw ArgumentError("transition to unknown state");
      if (st.obs < 0 || st.obs >= undef()) throw ArgumentError("transition with unknown observation");
    }
  }
}

int Question::block_index(const std::string& b) const { return find_name(blocks, b); }

Question make_question(const FiniteWorld& w, std::string id, const std::vector<std::vector<int>>& parts,
                       std::vector<std::string> names) {
  Question q;
  q.id = std::move(id);
  q.block_of.assign(w.states.size(), -1);
  for (std::size_t b = 0; b < parts.size(); ++b) {
    if (parts[b].empty()) throw ArgumentError("question " + q.id + " has an empty block");
    for (int s : parts[b]) {
      if (s < 0 || s >= static_cast<int>(w.states.size())) throw ArgumentError("question " + q.id + " names an unknown state");
      if (q.block_of[s] >= 0) throw ArgumentError("question " + q.id + " lists state " + w.states[s] + " twice");
      q.block_of[s] = static_cast<int>(b);
    }
  }
  for (std::size_t s = 0; s < q.block_of.size(); ++s)
    if (q.block_of[s] < 0) throw ArgumentError("question " + q.id + " does not cover state " + w.states[s]);
  if (names.empty())
    for (std::size_t b = 0; b < parts.size(); ++b) names.push_back("b" + std::to_string(b + 1));
  q.blocks = std::move(names);
  for (double m : block_mass(w, q))
    if (m <= 0) throw ArgumentError("question " + q.id + " has a block of probability 0");
  return q;
}

Question finest_question(const FiniteWorld& w) {
  std::vector<std::vector<int>> parts;
  for (std::size_t s = 0; s < w.states.size(); ++s) parts.push_back({static_cast<int>(s)});
  return make_question(w, "state", parts, w.states);
}

bool Answer::exact() const {
  return std::all_of(p.begin(), p.end(), [](const Interval& i) { return i.exact(); });
}

bool Answer::deterministic() const {
  if (!exact()) return false;
  int ones = 0;
  for (const Interval& i : p) {
    if (i.lo == 1.0)
      ++ones;
    else if (i.lo != 0.0)
      return false;
  }
  return ones == 1;
}

bool Answer::dont_know() const {
  return std::all_of(p.begin(), p.end(), [](const Interval& i) { return i.lo == 0 && i.hi == 1; });
}

double Answer::sum_lo() const {
  double s = 0;
  for (const Interval& i : p) s += i.lo;
  return s;
}

double Answer::sum_hi() const {
  double s = 0;
  for (const Interval& i : p) s += i.hi;
  return s;
}

Answer dont_know(const Question& q) { return {q.id, std::vector<Interval>(q.size(), Interval::unknown())}; }

Answer prior_answer(const FiniteWorld& w, const Question& q) {
  Answer a{q.id, {}};
  for (double m : block_mass(w, q)) a.p.push_back(Interval::point(m));
  return a;
}

Answer deterministic_answer(const Question& q, int block) {
  Answer a{q.id, std::vector<Interval>(q.size(), Interval::point(0))};
  a.p.at(block) = Interval::point(1);
  return a;
}

StateSet image_f2(const FiniteWorld& w, const StateSet& m, int a, int v) {
  StateSet out(w.states.size(), 0);
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (!m[s]) continue;
    FiniteWorld::Step st = w.f1(static_cast<int>(s), a);
    if (st.obs == v) out[st.next] = 1;
  }
  return out;
}

std::vector<int> outcome_of(const FiniteWorld& w, int a) {
  std::vector<int> out;
  for (std::size_t s = 0; s < w.states.size(); ++s) out.push_back(w.f1(static_cast<int>(s), a).obs);
  return out;
}

std::vector<double> block_mass(const FiniteWorld& w, const Question& q) {
  int nb = 0;
  for (int b : q.block_of) nb = std::max(nb, b + 1);
  std::vector<double> m(std::max<std::size_t>(nb, q.blocks.size()), 0.0);
  for (std::size_t s = 0; s < w.states.size(); ++s) m[q.block_of[s]] += w.prior[s];
  return m;
}

std::vector<Interval> factors_q(const Answer& aq, const Question& q, const FiniteWorld& w) {
  if (aq.p.size() != q.size()) throw ArgumentError("answer size differs from question " + q.id);
  std::vector<double> mass = block_mass(w, q);
  std::vector<Interval> out;
  for (std::size_t r = 0; r < q.size(); ++r) {
    if (mass[r] <= 0) throw ArgumentError("question " + q.id + " has a block of probability 0");
    out.push_back({aq.p[r].lo / mass[r], aq.p[r].hi / mass[r]});
  }
  return out;
}

std::vector<Interval> predict(const Answer& aq, const Question& q, const FiniteWorld& w, int a) {
  std::vector<Interval> f = factors_q(aq, q, w);
  std::vector<int> obs = outcome_of(w, a);
  std::vector<Interval> p(w.n_obs(), Interval::point(0));
  for (std::size_t s = 0; s < w.states.size(); ++s) {
    const Interval& qr = f[q.block_of[s]];
    p[obs[s]].lo += qr.lo * w.prior[s];
    p[obs[s]].hi += qr.hi * w.prior[s];
  }
  if (aq.exact()) return p;
  for (Interval& i : p) i = clamp01(i);
  return p;
}

Update update_f5(const Answer& aq, const Question& q, int a, int v, const Question& n, const FiniteWorld& w) {
  std::vector<Interval> f = factors_q(aq, q, w);
  std::vector<Interval> p = predict(aq, q, w, a);
  if (v < 0 || v >= static_cast<int>(w.n_obs())) throw ArgumentError("unknown observation");
  Interval pi = p[v];
  if (pi.hi <= 0) throw ImpossibleEvidence("observation " + (v == w.undef() ? std::string("undef") : w.observations[v]) + " is impossible");
  // mass[r][j] = P(Q_r and A_i and f^-1(N_j)); den[r] = P(Q_r and A_i)
  std::size_t nq = q.size(), nn = n.size();
  std::vector<std::vector<double>> mass(nn, std::vector<double>(nq, 0.0));
  std::vector<double> den(nq, 0.0);
  for (std::size_t s = 0; s < w.states.size(); ++s) {
    FiniteWorld::Step st = w.f1(static_cast<int>(s), a);
    if (st.obs != v) continue;
    int r = q.block_of[s];
    mass[n.block_of[st.next]][r] += w.prior[s];
    den[r] += w.prior[s];
  }
  Update out{{n.id, {}}, pi};
  if (aq.exact()) {
    double total = 0;
    for (std::size_t r = 0; r < nq; ++r) total += f[r].lo * den[r];
    if (total <= 0) throw ImpossibleEvidence("observation is impossible");
    double norm = 0;
    std::vector<double> an(nn, 0.0);
    for (std::size_t j = 0; j < nn; ++j) {
      for (std::size_t r = 0; r < nq; ++r) an[j] += f[r].lo * mass[j][r];
      an[j] /= total;
      norm += an[j];
    }
    for (double x : an) out.answer.p.push_back(Interval::point(x / norm));
    return out;
  }
  for (std::size_t j = 0; j < nn; ++j) out.answer.p.push_back(fractional_bounds(mass[j], den, f));
  return out;
}

Matrix joint_k(const Question& b, const Question& c, const FiniteWorld& w) {
  std::vector<double> pb = block_mass(w, b), pc = block_mass(w, c);
  Matrix k(pb.size(), std::vector<double>(pc.size(), 0.0));
  for (std::size_t s = 0; s < w.states.size(); ++s) k[b.block_of[s]][c.block_of[s]] += w.prior[s];
  for (std::size_t r = 0; r < pb.size(); ++r) {
    for (std::size_t s = 0; s < pc.size(); ++s) {
      if (pb[r] <= 0 || pc[s] <= 0) throw ArgumentError("question block with probability 0");
      k[r][s] /= pb[r] * pc[s];
    }
  }
  return k;
}

namespace {

Matrix implied_joint(const std::vector<double>& ab, const std::vector<double>& ac, const Matrix& k, const Matrix& t) {
  Matrix j(ab.size(), std::vector<double>(ac.size(), 0.0));
  for (std::size_t r = 0; r < ab.size(); ++r)
    for (std::size_t s = 0; s < ac.size(); ++s) j[r][s] = ab[r] * ac[s] * k[r][s] * t[r][s];
  return j;
}

double marginal_residual(const std::vector<double>& ab, const std::vector<double>& ac, const Matrix& j) {
  double res = 0;
  for (std::size_t r = 0; r < ab.size(); ++r) {
    double row = 0;
    for (std::size_t s = 0; s < ac.size(); ++s) row += j[r][s];
    res = std::max(res, std::abs(row - ab[r]));
  }
  for (std::size_t s = 0; s < ac.size(); ++s) {
    double col = 0;
    for (std::size_t r = 0; r < ab.size(); ++r) col += j[r][s];
    res = std::max(res, std::abs(col - ac[s]));
  }
  return res;
}

}  // namespace

FitResult fit_t(const Answer& ab_in, const Answer& ac_in, const Matrix& k, double tol, std::size_t max_iter) {
  if (!ab_in.exact() || !ac_in.exact()) throw ArgumentError("fit_t needs exact answers");
  std::vector<double> ab, ac;
  for (const Interval& i : ab_in.p) ab.push_back(i.lo);
  for (const Interval& i : ac_in.p) ac.push_back(i.lo);
  std::size_t nr = ab.size(), nc = ac.size();
  if (k.size() != nr || (nr > 0 && k[0].size() != nc)) throw ArgumentError("factor matrix shape differs from answers");

  std::vector<double> b(nr, 1.0), c(nc, 1.0);
  auto make_t = [&] {
    Matrix t(nr, std::vector<double>(nc, 0.0));
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t s = 0; s < nc; ++s) t[r][s] = k[r][s] > 0 ? b[r] * c[s] : 0.0;
    return t;
  };
  FitResult out;
  out.t = make_t();
  out.joint = implied_joint(ab, ac, k, out.t);
  out.residual = marginal_residual(ab, ac, out.joint);
  while (out.residual >= tol && out.iterations < max_iter) {
    for (std::size_t r = 0; r < nr; ++r) {
      if (ab[r] <= 0) continue;
      double d = 0;
      for (std::size_t s = 0; s < nc; ++s) d += ac[s] * k[r][s] * c[s];
      if (d <= 0)
        throw ImpossibleAnswer("questions cannot have answers " + std::to_string(r + 1) + " and the given column answers at the same time");
      b[r] = 1.0 / d;
    }
    for (std::size_t s = 0; s < nc; ++s) {
      if (ac[s] <= 0) continue;
      double d = 0;
      for (std::size_t r = 0; r < nr; ++r) d += ab[r] * k[r][s] * b[r];
      if (d <= 0)
        throw ImpossibleAnswer("questions cannot have the given row answers and answer " + std::to_string(s + 1) + " at the same time");
      c[s] = 1.0 / d;
    }
    ++out.iterations;
    out.t = make_t();
    out.joint = implied_joint(ab, ac, k, out.t);
    out.residual = marginal_residual(ab, ac, out.joint);
  }
  out.converged = out.residual < tol;
  return out;
}

std::vector<double> state_weights(const GroupAnswer& ag, const std::vector<Question>& gq, const FiniteWorld& w) {
  if (ag.empty() || ag.size() != gq.size()) throw ArgumentError("group answer size differs from question group");
  if (!all_exact(ag)) throw ArgumentError("state weights need exact answers");
  Cells cur = cells_of(gq[0], ag[0], w);
  for (double m : cur.mass)
    if (m <= 0) throw ArgumentError("question block with probability 0");
  for (std::size_t g = 1; g < gq.size(); ++g) {
    Question cq = as_question(cur);
    FitResult fit = fit_t(as_answer(cur), ag[g], joint_k(cq, gq[g], w), 1e-13, 10000);
    if (!fit.converged)
      throw ImpossibleAnswer("marginal fitting for question " + gq[g].id + " did not converge, residual " +
                             std::to_string(fit.residual));
    // Refine into the nonempty product cells.
    std::size_t nc = gq[g].size();
    std::vector<int> cell_id(cur.mass.size() * nc, -1);
    Cells next;
    next.block_of.resize(w.states.size());
    for (std::size_t s = 0; s < w.states.size(); ++s) {
      int r = cur.block_of[s], c = gq[g].block_of[s];
      int& id = cell_id[r * nc + c];
      if (id < 0) {
        id = static_cast<int>(next.mass.size());
        next.mass.push_back(0);
        next.answer.push_back(fit.joint[r][c]);
      }
      next.block_of[s] = id;
      next.mass[id] += w.prior[s];
    }
    cur = std::move(next);
  }
  return weights_of(cur, w);
}

std::vector<double> push_forward(const FiniteWorld& w, const std::vector<double>& weight, int a, int v) {
  std::vector<double> out(w.states.size(), 0.0);
  for (std::size_t s = 0; s < w.states.size(); ++s) {
    FiniteWorld::Step st = w.f1(static_cast<int>(s), a);
    if (st.obs == v) out[st.next] += weight[s];
  }
  return out;
}

namespace {

std::vector<Branch> branch_exact(const GroupAnswer& ag, int a, const FiniteWorld& w, const std::vector<Question>& gq) {
  std::vector<double> weight = state_weights(ag, gq, w);
  std::vector<Branch> out;
  for (int v = 0; v < static_cast<int>(w.n_obs()); ++v) {
    std::vector<double> next = push_forward(w, weight, a, v);
    double p = std::accumulate(next.begin(), next.end(), 0.0);
    if (p <= 0) continue;
    Branch br;
    br.observation = v;
    br.p = Interval::point(p);
    for (const Question& q : gq) {
      std::vector<double> m(q.size(), 0.0);
      for (std::size_t s = 0; s < next.size(); ++s) m[q.block_of[s]] += next[s];
      Answer an{q.id, {}};
      for (double x : m) an.p.push_back(Interval::point(x / p));
      br.answers.push_back(std::move(an));
    }
    out.push_back(std::move(br));
  }
  return out;
}

}  // namespace

std::vector<Branch> branch_f7(const GroupAnswer& ag, int a, const FiniteWorld& w, const std::vector<Question>& gq) {
  if (ag.size() != gq.size() || gq.empty()) throw ArgumentError("group answer size differs from question group");
  if (a < 0 || a >= static_cast<int>(w.actions.size())) throw ArgumentError("unknown action");
  if (all_exact(ag)) return branch_exact(ag, a, w, gq);

  std::vector<Branch> out;
  if (gq.size() == 1) {
    std::vector<Interval> p = predict(ag[0], gq[0], w, a);
    for (int v = 0; v < static_cast<int>(w.n_obs()); ++v) {
      if (p[v].hi <= 0) continue;
      Branch br;
      br.observation = v;
      br.p = p[v];
      try {
        br.answers.push_back(update_f5(ag[0], gq[0], a, v, gq[0], w).answer);
      } catch (const ImpossibleEvidence&) {
        continue;
      }
      out.push_back(std::move(br));
    }
    return out;
  }

  // Interval groups: hull over a sweep of exact selections.
  std::vector<std::vector<std::vector<double>>> grids;
  for (const Answer& an : ag) grids.push_back(exact_selections(an, 11));
  std::vector<std::optional<Branch>> acc(w.n_obs());
  std::vector<std::size_t> pick(ag.size(), 0);
  while (true) {
    GroupAnswer sel;
    for (std::size_t g = 0; g < ag.size(); ++g) {
      Answer an{ag[g].question, {}};
      for (double x : grids[g][pick[g]]) an.p.push_back(Interval::point(x));
      sel.push_back(std::move(an));
    }
    try {
      for (Branch& br : branch_exact(sel, a, w, gq)) {
        auto& slot = acc[br.observation];
        if (!slot) {
          slot = std::move(br);
          continue;
        }
        slot->p = hull(slot->p, br.p);
        for (std::size_t g = 0; g < gq.size(); ++g)
          for (std::size_t j = 0; j < gq[g].size(); ++j)
            slot->answers[g].p[j] = hull(slot->answers[g].p[j], br.answers[g].p[j]);
      }
    } catch (const ImpossibleAnswer&) {
    }
    std::size_t g = 0;
    while (g < pick.size() && ++pick[g] == grids[g].size()) pick[g++] = 0;
    if (g == pick.size()) break;
  }
  for (auto& slot : acc)
    if (slot) out.push_back(std::move(*slot));
  if (out.empty()) throw ImpossibleAnswer("no exact selection of the group answer is feasible");
  return out;
}

Relevance relevance(const FiniteWorld& w, const Question& q, int horizon) {
  std::size_t nb = q.size();
  std::vector<double> mass = block_mass(w, q);
  std::vector<std::vector<char>> past_same(nb, std::vector<char>(nb, 1));
  for (std::size_t r = 0; r < nb; ++r) {
    Answer prev = deterministic_answer(q, static_cast<int>(r));
    for (std::size_t a = 0; a < w.actions.size(); ++a) {
      for (int v = 0; v < static_cast<int>(w.n_obs()); ++v) {
        Update u;
        try {
          u = update_f5(prev, q, static_cast<int>(a), v, q, w);
        } catch (const ImpossibleEvidence&) {
          continue;
        }
        for (std::size_t j = 0; j < nb; ++j)
          for (std::size_t k = j + 1; k < nb; ++k)
            if (std::abs(u.answer.p[j].lo / mass[j] - u.answer.p[k].lo / mass[k]) > 1e-12) past_same[j][k] = 0;
      }
    }
  }
  // Future: compare unnormalized observation-sequence probabilities.
  auto start = [&](std::size_t b) {
    std::vector<double> x(w.states.size(), 0.0);
    for (std::size_t s = 0; s < x.size(); ++s)
      if (q.block_of[s] == static_cast<int>(b)) x[s] = w.prior[s] / mass[b];
    return x;
  };
  std::function<bool(const std::vector<double>&, const std::vector<double>&, int)> same =
      [&](const std::vector<double>& x, const std::vector<double>& y, int depth) {
        if (depth == 0) return true;
        for (std::size_t a = 0; a < w.actions.size(); ++a) {
          for (int v = 0; v < static_cast<int>(w.n_obs()); ++v) {
            std::vector<double> nx = push_forward(w, x, static_cast<int>(a), v);
            std::vector<double> ny = push_forward(w, y, static_cast<int>(a), v);
            double px = std::accumulate(nx.begin(), nx.end(), 0.0);
            double py = std::accumulate(ny.begin(), ny.end(), 0.0);
            if (std::abs(px - py) > 1e-12) return false;
            if (px > 0 && !same(nx, ny, depth - 1)) return false;
          }
        }
        return true;
      };
  Relevance out;
  for (std::size_t j = 0; j < nb; ++j) {
    for (std::size_t k = j + 1; k < nb; ++k) {
      if (past_same[j][k]) out.past.emplace_back(static_cast<int>(j), static_cast<int>(k));
      if (same(start(j), start(k), horizon)) out.future.emplace_back(static_cast<int>(j), static_cast<int>(k));
    }
  }
  return out;
}

}  // namespace edw
