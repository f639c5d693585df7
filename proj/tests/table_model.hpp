#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rnng/beam/search.hpp"

namespace rnng::testing {

/// Search model whose successors come from a fixed table keyed by the action
/// path: 'X' and 'Y' open nonterminals 0 and 1, 'w' generates, 'R' reduces.
struct TableModel {
  struct State {
    std::string path;
    double lp = 0.0;
    double log_prob() const { return lp; }
  };
  struct Option {
    char symbol;
    double p;
  };

  std::map<std::string, std::vector<Option>> table;

  static model::Action action_of(char c) {
    switch (c) {
      case 'X': return model::Action::nt(0);
      case 'Y': return model::Action::nt(1);
      case 'w': return model::Action::gen(0);
      default: return model::Action::reduce();
    }
  }
  static char symbol_of(const model::Action& a) {
    if (a.kind == corpus::ActionKind::NT) return a.id == 0 ? 'X' : 'Y';
    return a.kind == corpus::ActionKind::GEN ? 'w' : 'R';
  }

  std::vector<model::Successor> expand(const State& s, corpus::WordId, std::size_t, const model::Limits&) const {
    std::vector<model::Successor> out;
    auto it = table.find(s.path);
    if (it == table.end()) return out;
    for (const Option& o : it->second) out.push_back({action_of(o.symbol), s.lp + std::log(o.p)});
    return out;
  }
  State advance(const State& s, const model::Action& a, double lp) const { return {s.path + symbol_of(a), lp}; }
};

/// Two words with k = 2, k_word = 1, k_ft = 1.
///
/// Word 1 from the empty path:
///   pass 1  fringe X .6, Y .4; both kept as structural.
///   pass 2  fringe XY .42, YX .30, Xw .18, Yw .10; XY and YX kept;
///           Xw is the best lexical state below the cut and is fast-tracked.
///   pass 3  fringe XYw .21, XYR .21, YXR .18, YXw .12; XYw enters nextword,
///           XYR stays structural, YXw is fast-tracked. nextword holds 3.
///   nextword XYw .21, Xw .18, YXw .12; beam {XYw}; surprisal -log2 .21.
/// Word 2 from XYw:
///   pass 1  fringe XYwR .126, XYww .084; XYww enters nextword.
///   pass 2  fringe XYwRw .063, XYwRR .063; XYwRw enters nextword.
///   nextword XYww .084, XYwRw .063; beam {XYww}; surprisal log2 2.5.
inline TableModel hand_trace_model() {
  TableModel m;
  m.table[""] = {{'X', 0.6}, {'Y', 0.4}};
  m.table["X"] = {{'Y', 0.7}, {'w', 0.3}};
  m.table["Y"] = {{'X', 0.75}, {'w', 0.25}};
  m.table["XY"] = {{'w', 0.5}, {'R', 0.5}};
  m.table["YX"] = {{'w', 0.4}, {'R', 0.6}};
  m.table["XYw"] = {{'w', 0.4}, {'R', 0.6}};
  m.table["XYwR"] = {{'w', 0.5}, {'R', 0.5}};
  return m;
}

inline beam::BeamConfig hand_trace_config() {
  beam::BeamConfig c;
  c.k = 2;
  c.k_word = 1;
  c.k_ft = 1;
  c.max_iterations = 20;
  return c;
}

}  // namespace rnng::testing
