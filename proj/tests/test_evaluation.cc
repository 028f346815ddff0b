#include <algorithm>

#include "doctest.h"

#include "biparse/common.h"
#include "biparse/evaluation.h"
#include "calibration.h"
#include "support.h"

using namespace biparse;
using namespace biparse::testing;

namespace {

const std::vector<std::string> kForms = {"the", "cat", "ate", "."};
const std::vector<int> kHeads = {2, 3, 0, 3};
const std::vector<std::string> kLabels = {"det", "nsubj", "root", "punct"};

Sentence gold() { return make_sentence("en", kForms, kHeads, kLabels); }

AttachmentScores score(std::vector<Sentence> g, std::vector<Sentence> p) {
  return attachment_scores(g, p);
}

ScoredRun run(std::vector<std::int64_t> correct, std::vector<std::int64_t> tokens,
              const std::string& name) {
  ScoredRun r;
  r.system = name;
  r.correct_heads = correct;
  r.correct_labeled = correct;
  r.tokens = tokens;
  return r;
}

std::string avg(const GridRow& row) { return format_score(*row.average()); }

SelectionGrid column(const GridReport& r, const std::string& language) {
  const auto lang = std::find(r.languages.begin(), r.languages.end(), language) - r.languages.begin();
  SelectionGrid grid;
  for (const GridRow& row : r.strategies)
    if (row.strategy->state == Mode::Hard)
      grid[{row.strategy->words, row.strategy->chars}] = *row.las[lang];
  return grid;
}

}  // namespace

TEST_CASE("attachment scores on crafted cases") {
  // identical trees
  CHECK(score({gold()}, {gold()}).uas == 100);
  CHECK(score({gold()}, {gold()}).las == 100);

  // one wrong label
  const Sentence relabeled = make_sentence("en", kForms, kHeads, {"det", "obj", "root", "punct"});
  CHECK(score({gold()}, {relabeled}).uas == 100);
  CHECK(score({gold()}, {relabeled}).las == 75);

  // wrong heads, labels copied
  const Sentence reattached = make_sentence("en", kForms, {2, 3, 0, 2}, kLabels);
  CHECK(score({gold()}, {reattached}).uas == 75);
  CHECK(score({gold()}, {reattached}).las == 75);
  const Sentence chain = make_sentence("en", kForms, {3, 1, 0, 1}, kLabels);
  CHECK(score({gold()}, {chain}).uas == 25);
  CHECK(score({gold()}, {chain}).las == 25);

  // a right label on a wrong head earns nothing; punctuation counts
  const Sentence mixed = make_sentence("en", kForms, {3, 3, 0, 2}, {"det", "nsubj", "root", "punct"});
  CHECK(score({gold()}, {mixed}).uas == 50);
  CHECK(score({gold()}, {mixed}).las == 50);

  // micro-average over sentences; subtypes are part of the label
  const Sentence g2 = make_sentence("en", {"my", "dog"}, {2, 0}, {"nmod:poss", "root"});
  const Sentence p2 = make_sentence("en", {"my", "dog"}, {2, 0}, {"nmod", "root"});
  const AttachmentScores both = score({gold(), g2}, {relabeled, p2});
  CHECK(both.uas == 100);
  CHECK(both.las == 100.0 * 4 / 6);

  const ScoredRun r = score_run(std::vector<Sentence>{gold(), g2},
                                std::vector<Sentence>{reattached, p2}, "en", "sys");
  CHECK(r.correct_heads == std::vector<std::int64_t>{3, 2});
  CHECK(r.correct_labeled == std::vector<std::int64_t>{3, 1});
  CHECK(r.tokens == std::vector<std::int64_t>{4, 2});
}

TEST_CASE("misaligned input is rejected") {
  CHECK_THROWS_AS(score({gold()}, {}), EvaluationError);
  const Sentence shorter = make_sentence("en", {"the", "cat", "ate"}, {2, 3, 0}, {"det", "nsubj", "root"});
  CHECK_THROWS_AS(score({gold(), gold()}, {gold(), shorter}), EvaluationError);
  try {
    score({gold(), gold()}, {gold(), shorter});
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("sentence 2") != std::string::npos);
  }
  CHECK_THROWS_AS(randomization_test(run({1}, {2}, "a"), run({1, 1}, {2, 2}, "b")), EvaluationError);
  CHECK_THROWS_AS(randomization_test(run({1}, {2}, "a"), run({1}, {2}, "b"), 0), UsageError);
}

TEST_CASE("randomization test") {
  const ScoredRun a = run({5, 7, 3, 9, 4}, {8, 9, 5, 10, 6}, "a");
  CHECK(randomization_test(a, a, 2000) == 1.0);

  std::vector<std::int64_t> tokens(60, 10), top(60, 10), below(60, 9);
  const double p = randomization_test(run(top, tokens, "a"), run(below, tokens, "b"), 10000);
  CHECK(p < 0.01);
  CHECK(p == doctest::Approx(1.0 / 10001));
  CHECK(randomization_test(run(below, tokens, "b"), run(top, tokens, "a"), 10000) == p);

  // one sentence of difference out of several is not significant
  std::vector<std::int64_t> almost = top;
  almost[0] = 9;
  CHECK(randomization_test(run(top, tokens, "a"), run(almost, tokens, "b"), 10000) == 1.0);

  // same seed, same p
  const ScoredRun c = run({4, 7, 1, 9, 6}, {8, 9, 5, 10, 6}, "c");
  CHECK(randomization_test(a, c, 3000, 9) == randomization_test(a, c, 3000, 9));
}

TEST_CASE("randomization test is calibrated under the null") {
  const auto ps = null_p_values(1000, 400, 999, 17);
  CHECK(ks_uniform(ps) <= 0.05);
  const auto rejected = std::count_if(ps.begin(), ps.end(), [](double p) { return p <= 0.05; });
  CHECK(rejected <= 80);
  CHECK(ks_uniform({0.5}) == 0.5);
  CHECK(ks_uniform({0.25, 0.75}) == 0.25);
}

TEST_CASE("scores round half up to one decimal") {
  CHECK(format_score(79.05) == "79.1");
  CHECK(format_score(79.04) == "79.0");
  CHECK(format_score(78.15) == "78.2");
  CHECK(format_score(0.05) == "0.1");
  CHECK(format_score(100) == "100.0");
  CHECK(format_score(79.1 + 78.9 - 78.9) == "79.1");
}

TEST_CASE("related-pair grid fixture") {
  const GridReport r = load_grid_csv(BIPARSE_TEST_DATA "/grid_related.csv");
  REQUIRE(r.languages.size() == 10);
  REQUIRE(r.strategies.size() == 27);
  CHECK(avg(r.mono) == "78.2");
  CHECK(avg(r.best()) == "79.1");
  CHECK(r.best().strategy->str() == "C=x,W=h,S=id");
  CHECK(avg(r.language_best) == "79.5");
  for (std::size_t i = 0; i < 10; ++i) CHECK(r.strategies[i].strategy->state != Mode::Separate);
  for (std::size_t i = 0; i + 1 < r.strategies.size(); ++i)
    CHECK(*r.strategies[i].average() >= *r.strategies[i + 1].average());

  const std::string text = r.text();
  CHECK(text.find("Language-best") != std::string::npos);
  CHECK(text.find("Mono") != std::string::npos);
  CHECK(parse_grid_csv(r.csv()).csv() == r.csv());
}

TEST_CASE("unrelated-pair grid fixture") {
  const GridReport r = load_grid_csv(BIPARSE_TEST_DATA "/grid_unrelated.csv");
  REQUIRE(r.strategies.size() == 27);
  CHECK(avg(r.best()) == "78.9");
  CHECK(r.best().strategy->str() == "C=x,W=x,S=h");
  CHECK(avg(r.worst()) == "77.7");
}

TEST_CASE("grid report validation and missing cells") {
  GridRow mono{"Mono", std::nullopt, {80.0, 70.0}};
  GridRow full{"", SharingStrategy::parse("C=h,W=h,S=h"), {81.0, 69.0}};
  GridRow partial{"", SharingStrategy::parse("C=x,W=x,S=h"), {90.0, std::nullopt}};
  GridRow ahead{"", SharingStrategy::parse("C=id,W=x,S=x"), {79.0, 72.0}};
  const GridReport r = grid_report({"xa", "xb"}, {partial, full, ahead}, mono);
  CHECK(r.strategies.back().strategy->str() == "C=x,W=x,S=h");
  CHECK_FALSE(r.strategies.back().average().has_value());
  CHECK(r.best().strategy->str() == "C=id,W=x,S=x");
  CHECK(r.worst().strategy->str() == "C=h,W=h,S=h");
  CHECK(*r.language_best.las[0] == 90.0);
  CHECK(*r.language_best.las[1] == 72.0);

  // equal averages keep the canonical order
  GridRow tie{"", SharingStrategy::parse("C=x,W=h,S=x"), {75.5, 75.5}};
  const GridReport t = grid_report({"xa", "xb"}, {ahead, tie}, mono);
  CHECK(t.best().strategy->str() == "C=x,W=h,S=x");

  GridRow wide{"", SharingStrategy::parse("C=h,W=x,S=x"), {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(grid_report({"xa", "xb"}, {wide}, mono), ConfigError);
  CHECK_THROWS_AS(parse_grid_csv("C,W,S,xa,average\nq,x,x,1,1\n"), Error);
}

TEST_CASE("strategy selection") {
  const GridReport r = load_grid_csv(BIPARSE_TEST_DATA "/grid_related.csv");
  const SelectionGrid it = column(r, "it");
  REQUIRE(it.size() == 9);
  CHECK(select_strategy(it) == std::make_pair(Mode::Soft, Mode::Hard));
  CHECK(it.at({Mode::Soft, Mode::Hard}) == 84.7);
  const SelectionGrid nl = column(r, "nl");
  CHECK(select_strategy(nl) == std::make_pair(Mode::Soft, Mode::Hard));
  CHECK(nl.at({Mode::Soft, Mode::Hard}) == 79.2);

  SelectionGrid flat;
  for (Mode w : kModes)
    for (Mode c : kModes) flat[{w, c}] = 70;
  CHECK(select_strategy(flat) == std::make_pair(Mode::Separate, Mode::Separate));
  flat[{Mode::Hard, Mode::Separate}] = 71;
  flat[{Mode::Separate, Mode::Hard}] = 71;
  CHECK(select_strategy(flat) == std::make_pair(Mode::Separate, Mode::Hard));
  flat[{Mode::Soft, Mode::Soft}] = 71;
  flat[{Mode::Soft, Mode::Hard}] = 71;
  flat[{Mode::Separate, Mode::Hard}] = 70;
  CHECK(select_strategy(flat) == std::make_pair(Mode::Soft, Mode::Soft));

  flat.erase({Mode::Hard, Mode::Hard});
  CHECK_THROWS_AS(select_strategy(flat), ConfigError);
}

TEST_CASE("proposed-model table") {
  const std::vector<OursRow> rows = {{"es", Mode::Soft, Mode::Hard, 75.5, 74.1, 0.003},
                                     {"it", Mode::Separate, Mode::Soft, 80.0, 80.2, 0.4}};
  CHECK(format_score(rows[0].delta()) == "1.4");
  CHECK(format_score(rows[1].delta()) == "-0.2");
  const std::string ascii = ours_text(rows, false);
  for (const char* column : {"W", "C", "Ours", "Mono", "delta"})
    CHECK(ascii.find(column) != std::string::npos);
  CHECK(ascii.find("1.4") != std::string::npos);
  CHECK(ours_text(rows).find("δ") != std::string::npos);
  const std::string csv = ours_csv(rows);
  CHECK(csv.find("es") != std::string::npos);
  CHECK(csv.find("75.5") != std::string::npos);
}
