#pragma once

#include <string>
#include <utility>
#include <vector>

#include "edw/beliefs.hpp"

namespace edw {

// A finite world with its question group and Answer0, as read from the
// tabular text format.
struct BeliefWorld {
  FiniteWorld world;
  std::vector<Question> questions;
  GroupAnswer answer0;
};

// Lines:
//   states s0 s1 ...            actions a b        observations x y
//   prior uniform | prior 0.25 0.75 ... | prior weights 1 3 ...
//   t <state> <action> -> <state> <observation>   (missing pairs are undefined)
//   question B { b1: s0 s1 ; b2: s2 }
//   answer B { b1: 0.5 ; b2: [0.25,0.5] } | answer B prior | answer B dontknow | answer B = b1
BeliefWorld parse_belief_world(const std::string& text);
BeliefWorld load_belief_world(const std::string& path);
std::string serialize_belief_world(const BeliefWorld& bw);

using BeliefScript = std::vector<std::pair<std::string, std::string>>;

// One "action observation" pair per line.
BeliefScript parse_belief_script(const std::string& text);
BeliefScript load_belief_script(const std::string& path);

// Replays the script through branch_f7; ImpossibleEvidence when a scripted
// observation has no branch. Returns the JSON report text.
std::string belief_report(const BeliefWorld& bw, const BeliefScript& script);

}  // namespace edw
