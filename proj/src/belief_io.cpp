#include "edw/belief_io.hpp"

#include <cctype>
#include <cmath>
#include <optional>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "edw/errors.hpp"

namespace edw {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> tokens(const std::string& line) {
  // Braces, colons, semicolons and brackets are their own tokens.
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else if (ch == '{' || ch == '}' || ch == ':' || ch == ';' || ch == '[' || ch == ']' || ch == ',' || ch == '=') {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ArgumentError("line " + std::to_string(line) + ": " + msg);
}

double number(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + s + "'");
  }
  if (used != s.size()) fail(line, "expected a number, got '" + s + "'");
  return v;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct PendingAnswer {
  std::string question;
  std::vector<std::string> toks;
  int line;
};

Answer resolve_answer(const BeliefWorld& bw, const Question& q, const PendingAnswer& pa) {
  const auto& t = pa.toks;
  if (t.size() == 1 && t[0] == "prior") return prior_answer(bw.world, q);
  if (t.size() == 1 && t[0] == "dontknow") return dont_know(q);
  if (t.size() == 2 && t[0] == "=") {
    int b = q.block_index(t[1]);
    if (b < 0) fail(pa.line, "unknown block " + t[1]);
    return deterministic_answer(q, b);
  }
  if (t.empty() || t.front() != "{" || t.back() != "}") fail(pa.line, "malformed answer");
  Answer a{q.id, std::vector<Interval>(q.size(), Interval::point(0))};
  std::vector<char> seen(q.size(), 0);
  std::size_t i = 1;
  while (i + 1 < t.size()) {
    int b = q.block_index(t[i]);
    if (b < 0) fail(pa.line, "unknown block " + t[i]);
    if (seen[b]) fail(pa.line, "block " + t[i] + " answered twice");
    seen[b] = 1;
    if (i + 2 >= t.size() || t[i + 1] != ":") fail(pa.line, "expected ':' after " + t[i]);
    i += 2;
    Interval v;
    if (t[i] == "[") {
      if (i + 4 >= t.size() || t[i + 2] != "," || t[i + 4] != "]") fail(pa.line, "malformed interval");
      v = {number(t[i + 1], pa.line), number(t[i + 3], pa.line)};
      i += 5;
    } else {
      v = Interval::point(number(t[i], pa.line));
      i += 1;
    }
    if (!(v.lo >= 0 && v.lo <= v.hi && v.hi <= 1)) fail(pa.line, "interval outside [0,1]");
    a.p[b] = v;
    if (t[i] == ";") ++i;
  }
  if (a.exact() && std::abs(a.sum_lo() - 1.0) > 1e-9) fail(pa.line, "exact answer does not sum to 1");
  if (a.sum_lo() > 1 + 1e-9 || a.sum_hi() < 1 - 1e-9) fail(pa.line, "answer admits no distribution");
  return a;
}

}  // namespace

BeliefWorld parse_belief_world(const std::string& text) {
  BeliefWorld bw;
  FiniteWorld& w = bw.world;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_prior = false, uniform = false;
  std::vector<double> prior;
  struct T {
    std::string s, a, n, v;
    int line;
  };
  std::vector<T> trans;
  struct Q {
    std::string id;
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> parts;
    int line;
  };
  std::vector<Q> qs;
  std::vector<PendingAnswer> answers;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    std::vector<std::string> t = tokens(raw);
    if (t.empty()) continue;
    const std::string& kw = t[0];
    if (kw == "states" || kw == "actions" || kw == "observations") {
      auto& dst = kw == "states" ? w.states : kw == "actions" ? w.actions : w.observations;
      if (!dst.empty()) fail(line, kw + " declared twice");
      dst.assign(t.begin() + 1, t.end());
      for (std::size_t i = 0; i < dst.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (dst[i] == dst[j]) fail(line, "duplicate name " + dst[i]);
      if (kw == "observations")
        for (const auto& o : dst)
          if (o == "undef") fail(line, "undef is reserved");
    } else if (kw == "prior") {
      if (have_prior) fail(line, "prior declared twice");
      have_prior = true;
      if (t.size() == 2 && t[1] == "uniform") {
        uniform = true;
      } else if (t.size() > 1 && t[1] == "weights") {
        double sum = 0;
        for (std::size_t i = 2; i < t.size(); ++i) {
          prior.push_back(number(t[i], line));
          if (prior.back() < 0) fail(line, "negative weight");
          sum += prior.back();
        }
        if (sum <= 0) fail(line, "weights sum to 0");
        for (double& p : prior) p /= sum;
      } else {
        for (std::size_t i = 1; i < t.size(); ++i) prior.push_back(number(t[i], line));
      }
    } else if (kw == "t") {
      std::vector<std::string> u(t.begin() + 1, t.end());
      if (u.size() != 5 || u[2] != "->") fail(line, "expected: t <state> <action> -> <state> <observation>");
      trans.push_back({u[0], u[1], u[3], u[4], line});
    } else if (kw == "question") {
      if (t.size() < 4 || t[2] != "{" || t.back() != "}") fail(line, "expected: question <id> { block: states ; ... }");
      Q q{t[1], {}, {}, line};
      std::size_t i = 3;
      while (i + 1 < t.size()) {
        if (i + 1 >= t.size() || t[i + 1] != ":") fail(line, "expected ':' after block name");
        q.names.push_back(t[i]);
        q.parts.emplace_back();
        i += 2;
        while (i + 1 < t.size() && t[i] != ";") q.parts.back().push_back(t[i++]);
        if (t[i] == ";") ++i;
      }
      qs.push_back(std::move(q));
    } else if (kw == "answer") {
      if (t.size() < 3) fail(line, "expected: answer <question> ...");
      answers.push_back({t[1], std::vector<std::string>(t.begin() + 2, t.end()), line});
    } else {
      fail(line, "unknown statement " + kw);
    }
  }
  if (w.states.empty()) throw ArgumentError("missing states");
  if (w.actions.empty()) throw ArgumentError("missing actions");
  std::size_t n = w.states.size();
  if (!have_prior || uniform) {
    w.prior.assign(n, 1.0 / static_cast<double>(n));
  } else {
    if (prior.size() != n) throw ArgumentError("prior lists " + std::to_string(prior.size()) + " weights for " + std::to_string(n) + " states");
    w.prior = prior;
  }
  w.table.assign(n, std::vector<FiniteWorld::Step>(w.actions.size()));
  for (const T& tr : trans) {
    int s = w.state_index(tr.s), a = w.action_index(tr.a), nx = w.state_index(tr.n);
    int v = w.observation_index(tr.v);
    if (s < 0 || nx < 0) fail(tr.line, "unknown state");
    if (a < 0) fail(tr.line, "unknown action " + tr.a);
    if (v < 0 || v == w.undef()) fail(tr.line, "unknown observation " + tr.v);
    if (w.table[s][a].next >= 0) fail(tr.line, "transition for " + tr.s + " " + tr.a + " given twice");
    w.table[s][a] = {nx, v};
  }
  w.check();
  for (const Q& q : qs) {
    std::vector<std::vector<int>> parts;
    for (const auto& p : q.parts) {
      parts.emplace_back();
      for (const auto& s : p) {
        int i = w.state_index(s);
        if (i < 0) fail(q.line, "unknown state " + s);
        parts.back().push_back(i);
      }
    }
    for (const Question& prev : bw.questions)
      if (prev.id == q.id) fail(q.line, "question " + q.id + " declared twice");
    try {
      bw.questions.push_back(make_question(w, q.id, parts, q.names));
    } catch (const ArgumentError& e) {
      fail(q.line, e.what());
    }
  }
  if (bw.questions.empty()) bw.questions.push_back(finest_question(w));
  std::vector<std::optional<Answer>> given(bw.questions.size());
  for (const PendingAnswer& pa : answers) {
    std::size_t i = 0;
    while (i < bw.questions.size() && bw.questions[i].id != pa.question) ++i;
    if (i == bw.questions.size()) fail(pa.line, "answer for unknown question " + pa.question);
    if (given[i]) fail(pa.line, "question " + pa.question + " answered twice");
    given[i] = resolve_answer(bw, bw.questions[i], pa);
  }
  for (std::size_t i = 0; i < given.size(); ++i)
    bw.answer0.push_back(given[i] ? *given[i] : prior_answer(w, bw.questions[i]));
  return bw;
}

BeliefWorld load_belief_world(const std::string& path) { return parse_belief_world(read_file(path)); }

std::string serialize_belief_world(const BeliefWorld& bw) {
  const FiniteWorld& w = bw.world;
  std::ostringstream out;
  auto names = [&](const char* kw, const std::vector<std::string>& v) {
    out << kw;
    for (const auto& s : v) out << ' ' << s;
    out << '\n';
  };
  names("states", w.states);
  names("actions", w.actions);
  names("observations", w.observations);
  out << "prior";
  for (double p : w.prior) out << ' ' << fmt(p);
  out << '\n';
  for (std::size_t s = 0; s < w.states.size(); ++s)
    for (std::size_t a = 0; a < w.actions.size(); ++a) {
      const auto& st = w.table[s][a];
      if (st.next >= 0)
        out << "t " << w.states[s] << ' ' << w.actions[a] << " -> " << w.states[st.next] << ' ' << w.observations[st.obs] << '\n';
    }
  for (const Question& q : bw.questions) {
    out << "question " << q.id << " {";
    for (std::size_t b = 0; b < q.size(); ++b) {
      out << (b ? " ; " : " ") << q.blocks[b] << ':';
      for (std::size_t s = 0; s < q.block_of.size(); ++s)
        if (q.block_of[s] == static_cast<int>(b)) out << ' ' << w.states[s];
    }
    out << " }\n";
  }
  for (std::size_t i = 0; i < bw.answer0.size(); ++i) {
    const Question& q = bw.questions[i];
    const Answer& a = bw.answer0[i];
    out << "answer " << q.id << " {";
    for (std::size_t b = 0; b < q.size(); ++b) {
      out << (b ? " ; " : " ") << q.blocks[b] << ": ";
      if (a.p[b].exact())
        out << fmt(a.p[b].lo);
      else
        out << '[' << fmt(a.p[b].lo) << ',' << fmt(a.p[b].hi) << ']';
    }
    out << " }\n";
  }
  return out.str();
}

BeliefScript parse_belief_script(const std::string& text) {
  BeliefScript out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    std::istringstream ls(raw);
    std::vector<std::string> t;
    for (std::string x; ls >> x;) t.push_back(x);
    if (t.empty()) continue;
    if (t.size() != 2) fail(line, "expected: <action> <observation>");
    out.emplace_back(t[0], t[1]);
  }
  return out;
}

BeliefScript load_belief_script(const std::string& path) { return parse_belief_script(read_file(path)); }

namespace {

nlohmann::ordered_json interval_json(const Interval& i) { return nlohmann::ordered_json::array({i.lo, i.hi}); }

nlohmann::ordered_json group_json(const BeliefWorld& bw, const GroupAnswer& ag) {
  nlohmann::ordered_json g = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < ag.size(); ++i) {
    nlohmann::ordered_json a = nlohmann::ordered_json::object();
    for (std::size_t b = 0; b < bw.questions[i].size(); ++b) a[bw.questions[i].blocks[b]] = interval_json(ag[i].p[b]);
    g[bw.questions[i].id] = a;
  }
  return g;
}

}  // namespace

std::string belief_report(const BeliefWorld& bw, const BeliefScript& script) {
  const FiniteWorld& w = bw.world;
  auto obs_name = [&](int v) { return v == w.undef() ? std::string("undef") : w.observations[v]; };
  nlohmann::ordered_json rep;
  rep["questions"] = nlohmann::ordered_json::array();
  for (const Question& q : bw.questions) rep["questions"].push_back(q.id);
  rep["initial"] = group_json(bw, bw.answer0);
  rep["steps"] = nlohmann::ordered_json::array();
  GroupAnswer ag = bw.answer0;
  int t = 0;
  for (const auto& [an, on] : script) {
    ++t;
    int a = w.action_index(an);
    if (a < 0) throw ArgumentError("step " + std::to_string(t) + ": unknown action " + an);
    int v = w.observation_index(on);
    if (v < 0) throw ArgumentError("step " + std::to_string(t) + ": unknown observation " + on);
    std::vector<Branch> brs = branch_f7(ag, a, w, bw.questions);
    nlohmann::ordered_json step;
    step["t"] = t;
    step["action"] = an;
    step["observation"] = on;
    nlohmann::ordered_json outcomes = nlohmann::ordered_json::object();
    const Branch* taken = nullptr;
    for (const Branch& br : brs) {
      outcomes[obs_name(br.observation)] = interval_json(br.p);
      if (br.observation == v) taken = &br;
    }
    if (!taken) throw ImpossibleEvidence("step " + std::to_string(t) + ": observation " + on + " is impossible after " + an);
    step["p"] = interval_json(taken->p);
    step["outcomes"] = outcomes;
    step["answers"] = group_json(bw, taken->answers);
    ag = taken->answers;
    rep["steps"].push_back(step);
  }
  return rep.dump(2) + "\n";
}

}  // namespace edw
