#ifndef BIPARSE_TRANSITION_H_
#define BIPARSE_TRANSITION_H_

// Arc-hybrid transition system with SWAP.
//
//   SHIFT        (s, b|B)       => (s|b, B)
//   LEFT-ARC_l   (s|s0, b|B)    => (s, b|B)       + (b, l, s0)
//   RIGHT-ARC_l  (s|s1|s0, B)   => (s|s1, B)      + (s1, l, s0)
//   SWAP         (s|s0, b|B)    => (s, b|s0|B)
//
// Node 0 is ROOT; it sits at the end of the buffer and is only ever a head.
// Training supervision is static while the buffer is being reordered into the
// projective order of the gold tree (SWAP, and the SHIFTs that feed it) and
// dynamic for everything else.

#include <bitset>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biparse/conllu.h"
#include "biparse/lexicon.h"

namespace biparse {

inline constexpr int kRoot = 0;

enum class Move : std::uint8_t { Shift = 0, LeftArc = 1, RightArc = 2, Swap = 3 };

struct Transition {
  Move move = Move::Shift;
  int label = -1;  // arc transitions only

  bool operator==(const Transition&) const = default;
};

std::string move_name(Move m);
// "SHIFT", "LEFT-ARC(nsubj)", ...; labels printed as ids without a vocabulary.
std::string transition_name(Transition t, const Vocabulary* labels = nullptr);

using MoveSet = std::bitset<4>;

inline bool has(MoveSet s, Move m) { return s.test(static_cast<std::size_t>(m)); }

struct Arc {
  int head = 0;
  int label = -1;
  int dependent = 0;
};

class Configuration {
 public:
  explicit Configuration(std::size_t n);

  std::size_t length() const { return n_; }
  // Bottom to top.
  const std::vector<int>& stack() const { return stack_; }
  // Front to back; ROOT is last.
  std::vector<int> buffer() const;
  std::size_t buffer_size() const { return buffer_rev_.size(); }
  int buffer_front() const { return buffer_rev_.back(); }
  // k-th buffer item from the front, or -1.
  int buffer_at(std::size_t k) const;
  // k-th stack item from the top, or -1.
  int stack_at(std::size_t k) const;

  bool terminal() const;
  const std::vector<Arc>& arcs() const { return arcs_; }
  int head(int node) const { return heads_[node]; }
  int label(int node) const { return labels_[node]; }

  // Throws TransitionError naming the violated precondition.
  void apply(Transition t);

  bool operator==(const Configuration& o) const {
    return stack_ == o.stack_ && buffer_rev_ == o.buffer_rev_ &&
           heads_ == o.heads_ && labels_ == o.labels_;
  }

 private:
  std::size_t n_;
  std::vector<int> stack_;
  std::vector<int> buffer_rev_;  // back() is the buffer front
  std::vector<int> heads_;
  std::vector<int> labels_;
  std::vector<Arc> arcs_;
};

Configuration initial_config(std::size_t n);
Configuration initial_config(const Sentence& sentence);

// Throws UsageError on a terminal configuration.
MoveSet legal_moves(const Configuration& c);

// Pure form of Configuration::apply.
Configuration apply(Configuration c, Transition t);

struct GoldTree {
  std::vector<int> heads;   // index 1..n; [0] unused
  std::vector<int> labels;  // label ids; [0] unused
  std::size_t size() const { return heads.size() - 1; }
};

GoldTree gold_tree(const Sentence& s, const Vocabulary& labels);
GoldTree gold_tree(std::vector<int> heads);  // unlabeled (all labels 0)

// rank[i] for i in 1..n: position of node i in the in-order traversal of the
// tree (left dependents, head, right dependents). Identity iff projective.
// rank[0] (ROOT) is n + 1.
std::vector<int> projective_order(const std::vector<int>& heads);

// True when SWAP is legal and the stack top must move behind the buffer front
// under the projective order.
bool swap_needed(const Configuration& c, std::span<const int> order);

// Number of reachable gold arcs lost by taking t (plus one for a wrong label
// on an otherwise correct arc). Arc-hybrid costs; SWAP is rejected here.
int dynamic_cost(const Configuration& c, Transition t, const GoldTree& gold);

// True when the buffer front follows, in the projective order, some later
// buffer item; it must then be shifted only to be swapped back behind it.
bool returns_to_buffer(const Configuration& c, std::span<const int> order);

// Order-aware cost. While reordering (swap_needed or returns_to_buffer) the
// static move (SWAP or SHIFT) costs 0 and every other transition at least 1;
// otherwise SWAP costs 1 and the rest take the arc-hybrid cost.
int dynamic_cost(const Configuration& c, Transition t, const GoldTree& gold,
                 std::span<const int> order);

// {SWAP} when swap_needed, {SHIFT} when returns_to_buffer, else every legal
// non-SWAP transition of minimal cost (zero on any configuration reached
// through zero-cost transitions), arc transitions carrying the gold label of
// the dependent.
std::vector<Transition> oracle_next(const Configuration& c,
                                    const GoldTree& gold,
                                    std::span<const int> order);

// Deterministic gold derivation: the static move while reordering, otherwise
// the first zero-cost transition in the order LEFT-ARC, RIGHT-ARC, SHIFT.
std::vector<Transition> static_sequence(const GoldTree& gold);

// One line per step: step, stack, buffer, transition, cost (tab-separated).
std::vector<std::string> oracle_trace(const GoldTree& gold,
                                      const Vocabulary* labels = nullptr);

}  // namespace biparse

#endif  // BIPARSE_TRANSITION_H_
