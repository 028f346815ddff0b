#ifndef BIPARSE_TESTS_ORACLE_SUPPORT_H_
#define BIPARSE_TESTS_ORACLE_SUPPORT_H_

#include <algorithm>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "biparse/common.h"
#include "biparse/conllu.h"
#include "biparse/transition.h"

namespace biparse::testing {

// All head vectors over n tokens that form a tree rooted at 0 (any number of
// root children).
inline std::vector<std::vector<int>> all_trees(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> h(n + 1, 0);
  std::function<void(int)> rec = [&](int i) {
    if (i > n) {
      try {
        validate_tree(h, "");
        out.push_back(h);
      } catch (const FormatError&) {
      }
      return;
    }
    for (int k = 0; k <= n; ++k) {
      if (k == i) continue;
      h[i] = k;
      rec(i + 1);
    }
  };
  rec(1);
  return out;
}

inline std::vector<Transition> candidates(const Configuration& c, int labels) {
  std::vector<Transition> out;
  const MoveSet legal = legal_moves(c);
  if (has(legal, Move::Shift)) out.push_back({Move::Shift, -1});
  if (has(legal, Move::Swap)) out.push_back({Move::Swap, -1});
  for (int l = 0; l < labels; ++l) {
    if (has(legal, Move::LeftArc)) out.push_back({Move::LeftArc, l});
    if (has(legal, Move::RightArc)) out.push_back({Move::RightArc, l});
  }
  return out;
}

// Exhaustive completion search over non-SWAP transitions: the largest number
// of gold arcs (head and label) still obtainable from the stack/buffer state.
struct CompletionOracle {
  const GoldTree& gold;
  std::map<std::pair<std::vector<int>, std::vector<int>>, int> memo;

  int gained(const Configuration& c, Transition t) const {
    if (t.move == Move::LeftArc) {
      const int d = c.stack().back();
      return gold.heads[d] == c.buffer_front() && gold.labels[d] == t.label;
    }
    if (t.move == Move::RightArc) {
      const int d = c.stack().back();
      return gold.heads[d] == c.stack_at(1) && gold.labels[d] == t.label;
    }
    return 0;
  }

  int future(const Configuration& c) {
    if (c.terminal()) return 0;
    auto key = std::make_pair(c.stack(), c.buffer());
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int best = 0;
    for (Move m : {Move::Shift, Move::LeftArc, Move::RightArc}) {
      if (!has(legal_moves(c), m)) continue;
      Transition t{m, -1};
      if (m != Move::Shift) t.label = gold.labels[c.stack().back()];
      best = std::max(best, gained(c, t) + future(apply(c, t)));
    }
    memo[key] = best;
    return best;
  }

  int cost(const Configuration& c, Transition t) {
    return future(c) - gained(c, t) - future(apply(c, t));
  }
};

}  // namespace biparse::testing

#endif  // BIPARSE_TESTS_ORACLE_SUPPORT_H_
