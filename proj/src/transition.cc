#include "biparse/transition.h"

#include <algorithm>
#include <functional>
#include <sstream>

#include "biparse/common.h"

namespace biparse {

std::string move_name(Move m) {
  switch (m) {
    case Move::Shift: return "SHIFT";
    case Move::LeftArc: return "LEFT-ARC";
    case Move::RightArc: return "RIGHT-ARC";
    case Move::Swap: return "SWAP";
  }
  return "?";
}

std::string transition_name(Transition t, const Vocabulary* labels) {
  std::string s = move_name(t.move);
  if (t.move == Move::LeftArc || t.move == Move::RightArc) {
    s += "(";
    if (labels && t.label >= 0 && t.label < static_cast<int>(labels->size()))
      s += labels->str(t.label);
    else
      s += std::to_string(t.label);
    s += ")";
  }
  return s;
}

Configuration::Configuration(std::size_t n) : n_(n) {
  if (n == 0) throw UsageError("initial configuration of an empty sentence");
  buffer_rev_.reserve(n + 1);
  buffer_rev_.push_back(kRoot);
  for (int i = static_cast<int>(n); i >= 1; --i) buffer_rev_.push_back(i);
  stack_.reserve(n);
  heads_.assign(n + 1, -1);
  labels_.assign(n + 1, -1);
}

std::vector<int> Configuration::buffer() const {
  return std::vector<int>(buffer_rev_.rbegin(), buffer_rev_.rend());
}

int Configuration::buffer_at(std::size_t k) const {
  if (k >= buffer_rev_.size()) return -1;
  return buffer_rev_[buffer_rev_.size() - 1 - k];
}

int Configuration::stack_at(std::size_t k) const {
  if (k >= stack_.size()) return -1;
  return stack_[stack_.size() - 1 - k];
}

bool Configuration::terminal() const {
  return stack_.empty() && buffer_rev_.size() == 1;
}

MoveSet legal_moves(const Configuration& c) {
  if (c.terminal())
    throw UsageError("legal_moves on a terminal configuration");
  MoveSet s;
  const bool front_is_root = c.buffer_front() == kRoot;
  const auto& st = c.stack();
  if (!front_is_root) s.set(static_cast<std::size_t>(Move::Shift));
  if (!st.empty()) s.set(static_cast<std::size_t>(Move::LeftArc));
  if (st.size() >= 2) s.set(static_cast<std::size_t>(Move::RightArc));
  if (!st.empty() && !front_is_root && st.back() < c.buffer_front())
    s.set(static_cast<std::size_t>(Move::Swap));
  return s;
}

void Configuration::apply(Transition t) {
  if (terminal())
    throw TransitionError(move_name(t.move) + " on a terminal configuration");
  switch (t.move) {
    case Move::Shift:
      if (buffer_front() == kRoot)
        throw TransitionError("SHIFT requires a non-ROOT buffer front");
      stack_.push_back(buffer_front());
      buffer_rev_.pop_back();
      break;
    case Move::LeftArc: {
      if (stack_.empty())
        throw TransitionError("LEFT-ARC requires a non-empty stack");
      const int dep = stack_.back();
      const int h = buffer_front();
      stack_.pop_back();
      heads_[dep] = h;
      labels_[dep] = t.label;
      arcs_.push_back(Arc{h, t.label, dep});
      break;
    }
    case Move::RightArc: {
      if (stack_.size() < 2)
        throw TransitionError("RIGHT-ARC requires at least two stack items");
      const int dep = stack_.back();
      stack_.pop_back();
      const int h = stack_.back();
      heads_[dep] = h;
      labels_[dep] = t.label;
      arcs_.push_back(Arc{h, t.label, dep});
      break;
    }
    case Move::Swap: {
      if (stack_.empty())
        throw TransitionError("SWAP requires a non-empty stack");
      if (buffer_front() == kRoot)
        throw TransitionError("SWAP requires a non-ROOT buffer front");
      if (stack_.back() >= buffer_front())
        throw TransitionError(
            "SWAP requires the stack top to precede the buffer front in the "
            "sentence");
      const int s0 = stack_.back();
      stack_.pop_back();
      buffer_rev_.insert(buffer_rev_.end() - 1, s0);
      break;
    }
  }
}

Configuration initial_config(std::size_t n) { return Configuration(n); }

Configuration initial_config(const Sentence& sentence) {
  return Configuration(sentence.size());
}

Configuration apply(Configuration c, Transition t) {
  c.apply(t);
  return c;
}

GoldTree gold_tree(const Sentence& s, const Vocabulary& labels) {
  GoldTree g;
  g.heads = s.heads();
  g.labels.assign(s.size() + 1, -1);
  for (const Token& t : s.tokens) g.labels[t.index] = labels.id(t.label);
  return g;
}

GoldTree gold_tree(std::vector<int> heads) {
  GoldTree g;
  g.labels.assign(heads.size(), 0);
  g.labels[0] = -1;
  g.heads = std::move(heads);
  return g;
}

std::vector<int> projective_order(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size()) - 1;
  std::vector<std::vector<int>> children(n + 1);
  for (int d = 1; d <= n; ++d) children.at(heads[d]).push_back(d);
  std::vector<int> rank(n + 1, 0);
  rank[0] = n + 1;
  int next = 1;
  // Explicit stack: (node, expanded?)
  std::vector<std::pair<int, bool>> work;
  for (auto it = children[0].rbegin(); it != children[0].rend(); ++it)
    work.push_back({*it, false});
  while (!work.empty()) {
    auto [node, expanded] = work.back();
    work.pop_back();
    if (expanded) {
      rank[node] = next++;
      continue;
    }
    const auto& kids = children[node];
    // push in reverse visiting order: right kids, self, left kids
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
      if (*it > node) work.push_back({*it, false});
    work.push_back({node, true});
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
      if (*it < node) work.push_back({*it, false});
  }
  return rank;
}

bool swap_needed(const Configuration& c, std::span<const int> order) {
  if (c.terminal()) return false;
  if (!has(legal_moves(c), Move::Swap)) return false;
  return order[c.stack().back()] > order[c.buffer_front()];
}

namespace {

bool on_stack(const Configuration& c, int node) {
  const auto& st = c.stack();
  return std::find(st.begin(), st.end(), node) != st.end();
}

bool in_buffer(const Configuration& c, int node, std::size_t from) {
  for (std::size_t k = from; k < c.buffer_size(); ++k)
    if (c.buffer_at(k) == node) return true;
  return false;
}

}  // namespace

int dynamic_cost(const Configuration& c, Transition t, const GoldTree& gold) {
  const MoveSet legal = legal_moves(c);
  if (!has(legal, t.move))
    throw TransitionError(move_name(t.move) + " is not legal here");
  const auto& gh = gold.heads;
  int cost = 0;
  switch (t.move) {
    case Move::LeftArc: {
      const int s0 = c.stack().back();
      const int s1 = c.stack_at(1);
      for (std::size_t k = 0; k < c.buffer_size(); ++k) {
        const int d = c.buffer_at(k);
        if (d != kRoot && gh[d] == s0) ++cost;
      }
      if (s1 >= 0 && gh[s0] == s1) ++cost;
      if (in_buffer(c, gh[s0], 1)) ++cost;
      if (gh[s0] == c.buffer_front() && t.label >= 0 &&
          t.label != gold.labels[s0])
        ++cost;
      break;
    }
    case Move::RightArc: {
      const int s0 = c.stack().back();
      const int s1 = c.stack_at(1);
      for (std::size_t k = 0; k < c.buffer_size(); ++k) {
        const int x = c.buffer_at(k);
        if ((x != kRoot && gh[x] == s0) || gh[s0] == x) ++cost;
      }
      if (gh[s0] == s1 && t.label >= 0 && t.label != gold.labels[s0]) ++cost;
      break;
    }
    case Move::Shift: {
      const int b = c.buffer_front();
      const int s0 = c.stack_at(0);
      for (int d : c.stack())
        if (gh[d] == b) ++cost;
      if (gh[b] != s0 && on_stack(c, gh[b])) ++cost;
      break;
    }
    case Move::Swap:
      throw UsageError("dynamic_cost: SWAP needs the projective order");
  }
  return cost;
}

bool returns_to_buffer(const Configuration& c, std::span<const int> order) {
  const int b = c.buffer_front();
  if (b == kRoot) return false;
  for (std::size_t k = 1; k + 1 < c.buffer_size(); ++k)
    if (order[c.buffer_at(k)] < order[b]) return true;
  return false;
}

int dynamic_cost(const Configuration& c, Transition t, const GoldTree& gold,
                 std::span<const int> order) {
  const bool needed = swap_needed(c, order);
  if (t.move == Move::Swap) {
    if (!has(legal_moves(c), Move::Swap))
      throw TransitionError("SWAP is not legal here");
    return needed ? 0 : 1;
  }
  if (needed) return std::max(dynamic_cost(c, t, gold), 1);
  if (returns_to_buffer(c, order))
    return t.move == Move::Shift ? 0 : std::max(dynamic_cost(c, t, gold), 1);
  return dynamic_cost(c, t, gold);
}

namespace {

Transition labeled(const Configuration& c, Move m, const GoldTree& gold) {
  Transition t{m, -1};
  if (m == Move::LeftArc || m == Move::RightArc)
    t.label = gold.labels[c.stack().back()];
  return t;
}

}  // namespace

std::vector<Transition> oracle_next(const Configuration& c,
                                    const GoldTree& gold,
                                    std::span<const int> order) {
  if (swap_needed(c, order)) return {Transition{Move::Swap, -1}};
  if (returns_to_buffer(c, order)) return {Transition{Move::Shift, -1}};
  const MoveSet legal = legal_moves(c);
  std::vector<Transition> best;
  int best_cost = -1;
  for (Move m : {Move::LeftArc, Move::RightArc, Move::Shift}) {
    if (!has(legal, m)) continue;
    const Transition t = labeled(c, m, gold);
    const int cost = dynamic_cost(c, t, gold, order);
    if (best_cost < 0 || cost < best_cost) {
      best.clear();
      best_cost = cost;
    }
    if (cost == best_cost) best.push_back(t);
  }
  if (best.empty()) throw OracleError("no legal transition available");
  return best;
}

std::vector<Transition> static_sequence(const GoldTree& gold) {
  const std::vector<int> order = projective_order(gold.heads);
  Configuration c(gold.size());
  std::vector<Transition> seq;
  while (!c.terminal()) {
    // oracle_next lists candidates in LEFT-ARC, RIGHT-ARC, SHIFT order
    const Transition t = oracle_next(c, gold, order).front();
    seq.push_back(t);
    c.apply(t);
  }
  return seq;
}

namespace {

std::string format_nodes(const std::vector<int>& nodes) {
  std::string s = "[";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += ' ';
    s += nodes[i] == kRoot ? std::string("ROOT") : std::to_string(nodes[i]);
  }
  return s + "]";
}

}  // namespace

std::vector<std::string> oracle_trace(const GoldTree& gold,
                                      const Vocabulary* labels) {
  const std::vector<int> order = projective_order(gold.heads);
  Configuration c(gold.size());
  std::vector<std::string> lines;
  int step = 0;
  while (!c.terminal()) {
    const Transition t = oracle_next(c, gold, order).front();
    const int cost = dynamic_cost(c, t, gold, order);
    std::ostringstream line;
    line << step++ << '\t' << format_nodes(c.stack()) << '\t'
         << format_nodes(c.buffer()) << '\t' << transition_name(t, labels)
         << '\t' << cost;
    lines.push_back(line.str());
    c.apply(t);
  }
  return lines;
}

}  // namespace biparse
