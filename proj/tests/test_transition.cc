#include "doctest.h"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "biparse/common.h"
#include "biparse/conllu.h"
#include "biparse/transition.h"
#include "oracle_support.h"

using namespace biparse;
using namespace biparse::testing;

namespace {

std::vector<int> random_tree(int n, std::mt19937_64& rng) {
  // attach each node in a random order to an already attached node
  std::vector<int> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = i + 1;
  std::shuffle(nodes.begin(), nodes.end(), rng);
  std::vector<int> attached{0};
  std::vector<int> h(n + 1, 0);
  for (int v : nodes) {
    std::uniform_int_distribution<std::size_t> pick(0, attached.size() - 1);
    h[v] = attached[pick(rng)];
    attached.push_back(v);
  }
  return h;
}

}  // namespace

TEST_CASE("initial configuration and legality") {
  Configuration c = initial_config(3);
  CHECK(c.buffer() == std::vector<int>{1, 2, 3, kRoot});
  CHECK(c.stack().empty());
  CHECK_FALSE(c.terminal());
  CHECK(legal_moves(c) == MoveSet().set(static_cast<std::size_t>(Move::Shift)));
  CHECK(initial_config(1).buffer() == std::vector<int>{1, kRoot});
  CHECK_THROWS_AS(initial_config(0), UsageError);

  Configuration one = apply(initial_config(1), {Move::Shift, -1});
  MoveSet expect;
  expect.set(static_cast<std::size_t>(Move::LeftArc));
  CHECK(legal_moves(one) == expect);

  Configuration done = apply(one, {Move::LeftArc, 0});
  CHECK(done.terminal());
  CHECK_THROWS_AS(legal_moves(done), UsageError);
}

TEST_CASE("swap legality follows sentence positions") {
  // reach stack [2], buffer [1, 3, ROOT]
  Configuration c = initial_config(3);
  c.apply({Move::Shift, -1});
  c.apply({Move::Swap, -1});
  CHECK(c.buffer() == std::vector<int>{2, 1, 3, kRoot});
  c.apply({Move::Shift, -1});
  CHECK(c.stack() == std::vector<int>{2});
  CHECK(c.buffer() == std::vector<int>{1, 3, kRoot});
  CHECK_FALSE(has(legal_moves(c), Move::Swap));
  CHECK_THROWS_AS(c.apply({Move::Swap, -1}), TransitionError);
}

TEST_CASE("apply definitions") {
  Configuration c = initial_config(2);
  c.apply({Move::Shift, -1});
  CHECK(c.stack() == std::vector<int>{1});
  CHECK(c.buffer() == std::vector<int>{2, kRoot});

  Configuration la = apply(c, {Move::LeftArc, 3});
  CHECK(la.stack().empty());
  CHECK(la.buffer() == std::vector<int>{2, kRoot});
  REQUIRE(la.arcs().size() == 1);
  CHECK(la.arcs()[0].head == 2);
  CHECK(la.arcs()[0].label == 3);
  CHECK(la.arcs()[0].dependent == 1);

  Configuration sw = apply(c, {Move::Swap, -1});
  CHECK(sw.stack().empty());
  CHECK(sw.buffer() == std::vector<int>{2, 1, kRoot});
  sw.apply({Move::Shift, -1});
  sw.apply({Move::Shift, -1});
  CHECK(sw.stack() == std::vector<int>{2, 1});

  Configuration ra = apply(sw, {Move::RightArc, 1});
  CHECK(ra.head(1) == 2);
  CHECK(ra.label(1) == 1);

  CHECK_THROWS_AS(initial_config(2).apply({Move::RightArc, 0}), TransitionError);
  CHECK_THROWS_AS(initial_config(2).apply({Move::LeftArc, 0}), TransitionError);
}

TEST_CASE("projective order") {
  SUBCASE("identity on every projective tree") {
    for (int n = 1; n <= 6; ++n)
      for (const auto& h : all_trees(n)) {
        if (!is_projective(h)) continue;
        auto r = projective_order(h);
        for (int i = 1; i <= n; ++i) REQUIRE(r[i] == i);
      }
  }
  SUBCASE("never identity on a non-projective tree") {
    for (int n = 1; n <= 6; ++n)
      for (const auto& h : all_trees(n)) {
        auto r = projective_order(h);
        bool identity = true;
        for (int i = 1; i <= n; ++i) identity &= r[i] == i;
        REQUIRE(identity == is_projective(h));
      }
  }
  SUBCASE("crossing pair fixture") {
    // 1 <- 3, 2 <- 4, 3 <- 0, 4 <- 3: arcs 3->1 and 4->2 cross
    std::vector<int> h{-1, 3, 4, 0, 3};
    REQUIRE_FALSE(is_projective(h));
    auto r = projective_order(h);
    CHECK(std::vector<int>(r.begin() + 1, r.end()) == std::vector<int>{1, 3, 2, 4});
  }
}

TEST_CASE("static sequence fixtures") {
  auto seq = static_sequence(gold_tree(std::vector<int>{-1, 2, 0}));
  CHECK(seq == std::vector<Transition>{{Move::Shift, -1},
                                       {Move::LeftArc, 0},
                                       {Move::Shift, -1},
                                       {Move::LeftArc, 0}});
  auto single = static_sequence(gold_tree(std::vector<int>{-1, 0}));
  CHECK(single == std::vector<Transition>{{Move::Shift, -1}, {Move::LeftArc, 0}});
}

TEST_CASE("dynamic cost equals brute-force completion loss") {
  // every projective tree up to 5 tokens, two labels, every configuration
  // reachable without SWAP (including through wrong transitions)
  std::mt19937_64 rng(7);
  std::size_t checked = 0;
  for (int n = 1; n <= 5; ++n) {
    for (const auto& h : all_trees(n)) {
      if (!is_projective(h)) continue;
      GoldTree gold = gold_tree(h);
      for (int i = 1; i <= n; ++i) gold.labels[i] = static_cast<int>(rng() % 2);
      CompletionOracle oracle{gold, {}};
      std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
      std::vector<Configuration> todo{initial_config(n)};
      while (!todo.empty()) {
        Configuration c = todo.back();
        todo.pop_back();
        if (c.terminal() || !seen.insert({c.stack(), c.buffer()}).second) continue;
        for (Transition t : candidates(c, 2)) {
          if (t.move == Move::Swap) continue;
          INFO("heads ", ::doctest::toString(h), " move ", transition_name(t));
          REQUIRE(dynamic_cost(c, t, gold) == oracle.cost(c, t));
          ++checked;
          todo.push_back(apply(c, t));
        }
      }
    }
  }
  CHECK(checked > 10000);
}

TEST_CASE("static sequence reconstructs every tree up to 7 tokens") {
  std::size_t nonprojective = 0;
  for (int n = 1; n <= 7; ++n) {
    for (const auto& h : all_trees(n)) {
      GoldTree gold = gold_tree(h);
      for (int i = 1; i <= n; ++i) gold.labels[i] = i % 3;
      Configuration c = initial_config(n);
      bool swapped = false;
      for (Transition t : static_sequence(gold)) {
        swapped |= t.move == Move::Swap;
        c.apply(t);
      }
      REQUIRE(c.terminal());
      for (int i = 1; i <= n; ++i) {
        REQUIRE(c.head(i) == h[i]);
        REQUIRE(c.label(i) == gold.labels[i]);
      }
      REQUIRE(swapped == !is_projective(h));
      nonprojective += !is_projective(h);
    }
  }
  CHECK(nonprojective > 0);
}

TEST_CASE("random zero-cost walks reach the gold tree") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 25);
    GoldTree gold = gold_tree(random_tree(n, rng));
    for (int i = 1; i <= n; ++i) gold.labels[i] = static_cast<int>(rng() % 4);
    const auto order = projective_order(gold.heads);
    Configuration c = initial_config(n);
    while (!c.terminal()) {
      auto next = oracle_next(c, gold, order);
      REQUIRE_FALSE(next.empty());
      for (Transition t : next) REQUIRE(dynamic_cost(c, t, gold, order) == 0);
      c.apply(next[rng() % next.size()]);
    }
    for (int i = 1; i <= n; ++i) {
      REQUIRE(c.head(i) == gold.heads[i]);
      REQUIRE(c.label(i) == gold.labels[i]);
    }
  }
}

TEST_CASE("oracle never swaps on projective trees") {
  std::mt19937_64 rng(3);
  int tested = 0;
  while (tested < 500) {
    const int n = 1 + static_cast<int>(rng() % 15);
    auto h = random_tree(n, rng);
    if (!is_projective(h)) continue;
    ++tested;
    for (Transition t : static_sequence(gold_tree(h))) REQUIRE(t.move != Move::Swap);
  }
}

TEST_CASE("any legal transition sequence terminates within n(n+1) steps") {
  // Longest path over the state graph; exact for small n. Each of the
  // n(n-1)/2 pairs can be swapped at most once and every swap costs one SWAP
  // plus one extra SHIFT.
  for (int n = 1; n <= 5; ++n) {
    std::map<std::pair<std::vector<int>, std::vector<int>>, int> memo;
    std::function<int(const Configuration&)> longest = [&](const Configuration& c) {
      if (c.terminal()) return 0;
      auto key = std::make_pair(c.stack(), c.buffer());
      if (auto it = memo.find(key); it != memo.end()) return it->second;
      int best = 0;
      for (Transition t : candidates(c, 1)) best = std::max(best, 1 + longest(apply(c, t)));
      memo[key] = best;
      return best;
    };
    INFO("n = ", n);
    CHECK(longest(initial_config(n)) == n * (n + 1));
  }
}

TEST_CASE("oracle trace format") {
  Vocabulary labels(false);
  labels.add("nsubj");
  labels.add("root");
  GoldTree gold;
  gold.heads = {-1, 2, 0};
  gold.labels = {-1, 0, 1};
  auto lines = oracle_trace(gold, &labels);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "0\t[]\t[1 2 ROOT]\tSHIFT\t0");
  CHECK(lines[1] == "1\t[1]\t[2 ROOT]\tLEFT-ARC(nsubj)\t0");
  CHECK(lines[2] == "2\t[]\t[2 ROOT]\tSHIFT\t0");
  CHECK(lines[3] == "3\t[2]\t[ROOT]\tLEFT-ARC(root)\t0");
}

TEST_CASE("cost checks reject illegal transitions") {
  GoldTree gold = gold_tree(std::vector<int>{-1, 0});
  CHECK_THROWS_AS(dynamic_cost(initial_config(1), {Move::LeftArc, 0}, gold),
                  TransitionError);
}
