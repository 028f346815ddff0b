#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "biparse/common.h"
#include "biparse/conllu.h"
#include "biparse/evaluation.h"
#include "biparse/experiment.h"
#include "biparse/lexicon.h"
#include "biparse/model.h"
#include "biparse/synthetic.h"
#include "biparse/training.h"
#include "biparse/transition.h"
#include "calibration.h"
#include "gradcheck.h"
#include "oracle_support.h"
#include "support.h"

using namespace biparse;
using namespace biparse::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Static sequences rebuild every gold tree of a mixed corpus.
Outcome oracle_reconstruction() {
  const auto t0 = Clock::now();
  std::vector<Sentence> corpus;
  for (const char* code : {"a1", "a2", "b1", "b2"}) {
    auto part = synthetic(code, 150, 21);
    corpus.insert(corpus.end(), part.begin(), part.end());
  }
  Vocabulary labels(false);
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens) labels.add(t.label);
  std::size_t non_projective = 0, reproduced = 0;
  for (const Sentence& s : corpus) {
    non_projective += !is_projective(s.heads());
    const GoldTree gold = gold_tree(s, labels);
    Configuration c = initial_config(s.size());
    for (const Transition& t : static_sequence(gold)) c.apply(t);
    bool same = c.terminal();
    for (std::size_t i = 1; same && i <= s.size(); ++i)
      same = c.head(static_cast<int>(i)) == gold.heads[i] &&
             c.label(static_cast<int>(i)) == gold.labels[i];
    reproduced += same;
  }
  const double secs = seconds_since(t0);
  return {reproduced == corpus.size() && corpus.size() >= 500 && non_projective >= 20 && secs < 10,
          std::to_string(reproduced) + "/" + std::to_string(corpus.size()) + " trees, " +
              std::to_string(non_projective) + " non-projective, " + fmt("%.1fs", secs)};
}

// 2. Closed-form arc costs against exhaustive completion search.
Outcome dynamic_cost_soundness() {
  const auto t0 = Clock::now();
  std::size_t trees = 0, checked = 0, mismatches = 0;
  for (int n = 1; n <= 4; ++n)
    for (const auto& h : all_trees(n)) {
      if (!is_projective(h)) continue;
      ++trees;
      const GoldTree gold = gold_tree(h);
      CompletionOracle oracle{gold, {}};
      std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
      std::vector<Configuration> todo{initial_config(n)};
      while (!todo.empty()) {
        const Configuration c = todo.back();
        todo.pop_back();
        if (c.terminal() || !seen.insert({c.stack(), c.buffer()}).second) continue;
        for (Transition t : candidates(c, 1)) {
          if (t.move == Move::Swap) continue;
          mismatches += dynamic_cost(c, t, gold) != oracle.cost(c, t);
          ++checked;
          todo.push_back(apply(c, t));
        }
      }
    }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && checked > 0 && secs < 60,
          std::to_string(trees) + " projective trees, " + std::to_string(checked) +
              " transitions, " + std::to_string(mismatches) + " mismatches, " + fmt("%.1fs", secs)};
}

std::vector<Sentence> gradient_sentences(const std::string& lang, bool first) {
  if (first)
    return {make_sentence(lang, {"el", "gato", "come"}, {2, 3, 0}, {"det", "nsubj", "root"}),
            make_sentence(lang, {"la", "casa", "roja"}, {3, 0, 2}, {"det", "root", "amod"})};
  return {make_sentence(lang, {"il", "gatto", "mangia"}, {2, 3, 0}, {"det", "nsubj", "root"})};
}

// 3. End-to-end loss gradients for all 27 strategies.
Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  const std::vector<std::vector<Sentence>> data = {gradient_sentences("xa", true),
                                                   gradient_sentences("xb", false)};
  double worst = 0;
  std::string where;
  std::size_t checked = 0, uncovered = 0;
  for (const SharingStrategy& st : all_strategies()) {
    ParserModel m(st, lexicon_for(data, {"xa", "xb"}, st), tiny_dims(), 1);
    std::set<std::string> touched;
    for (int lang = 0; lang < 2; ++lang)
      for (const Sentence& s : data[lang]) {
        const auto seq = static_sequence(gold_tree(s, m.lexicon().labels));
        auto loss = [&](Graph& g) { return trajectory_loss(g, m, s, lang, seq, 1.0); };
        m.parameters().clear_grads();
        {
          Graph g;
          g.backward(loss(g));
        }
        for (auto& [name, t] : m.parameters())
          if (t->touched()) touched.insert(name);
        const GradCheck r = gradcheck(m.parameters(), loss);
        checked += r.checked;
        if (r.max_relative > worst) {
          worst = r.max_relative;
          where = st.str() + " " + r.worst;
        }
      }
    uncovered += m.parameters().size() - touched.size();
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && uncovered == 0 && secs < 120,
          std::to_string(checked) + " entries, max relative error " + fmt("%.2e", worst) +
              " (" + where + "), " + std::to_string(uncovered) + " tensors never reached, " +
              fmt("%.1fs", secs)};
}

// 4. Default-size models fit a small bilingual corpus.
Outcome overfit() {
  const std::vector<LanguageData> data = {{"a1", synthetic("a1", 32, 5), {}},
                                          {"a2", synthetic("a2", 32, 6), {}}};
  std::vector<LanguageData> with_dev = data;
  for (LanguageData& d : with_dev) d.dev = d.train;
  bool pass = true;
  std::string detail;
  for (const char* name : {"C=x,W=x,S=x", "C=h,W=h,S=h", "C=id,W=id,S=id"}) {
    const auto t0 = Clock::now();
    TrainConfig cfg;
    cfg.strategy = SharingStrategy::parse(name);
    cfg.epochs = 50;
    cfg.stop_at_las = 95.5;
    const TrainResult r = train(cfg, with_dev);
    // training LAS of the kept model, pooled over both languages
    std::vector<Sentence> gold, predicted;
    for (int lang = 0; lang < 2; ++lang) {
      const auto parsed = parse_all(r.model, data[lang].train, lang);
      gold.insert(gold.end(), data[lang].train.begin(), data[lang].train.end());
      predicted.insert(predicted.end(), parsed.begin(), parsed.end());
    }
    const double las = attachment_scores(gold, predicted).las;
    const double secs = seconds_since(t0);
    pass = pass && las >= 95 && secs < 600;
    if (!detail.empty()) detail += "; ";
    detail += std::string(name) + " LAS " + fmt("%.1f", las) + " after " +
              std::to_string(r.report.epochs.size()) + " epochs " + fmt("%.0fs", secs);
  }
  return {pass, detail};
}

// 5. Forward/backward, parameter counts and language tables across the lattice.
Outcome sharing_lattice() {
  const std::vector<std::vector<Sentence>> data = {synthetic("a1", 20, 3), synthetic("b1", 20, 4)};
  const std::vector<std::string> langs = {"a1", "b1"};
  const std::map<Component, std::string> prefix = {
      {Component::Char, "char"}, {Component::Word, "word"}, {Component::State, "state"}};
  auto mode_of = [](const SharingStrategy& s, Component c) {
    return c == Component::Char ? s.chars : c == Component::Word ? s.words : s.state;
  };
  std::map<std::string, std::map<Component, std::size_t>> counts;
  std::size_t failures = 0, table_errors = 0;
  for (const SharingStrategy& st : all_strategies()) {
    ParserModel m(st, lexicon_for(data, langs, st), ModelDims{}, 1);
    for (const auto& [c, p] : prefix) {
      counts[st.str()][c] = m.parameter_count(c);
      const bool soft = mode_of(st, c) == Mode::Soft;
      table_errors += m.has_language_table(c) != soft;
      table_errors += m.parameters().contains(p + "/shared/lang_embeddings") != soft;
    }
    for (int lang = 0; lang < 2; ++lang) {
      const Sentence& s = data[lang][0];
      m.parameters().clear_grads();
      Graph g;
      const Expr loss = trajectory_loss(g, m, s, lang, static_sequence(gold_tree(s, m.lexicon().labels)), 1.0);
      const double value = g.scalar(loss);
      g.backward(loss);
      std::size_t reached = 0;
      for (auto& [name, t] : m.parameters()) reached += t->touched();
      failures += !std::isfinite(value) || reached == 0;
    }
    m.parameters().clear_grads();
  }
  std::size_t order_errors = 0, comparisons = 0;
  for (const SharingStrategy& st : all_strategies())
    for (const auto& [c, p] : prefix) {
      if (mode_of(st, c) != Mode::Separate) continue;
      auto with = [&](Mode mode) {
        SharingStrategy s = st;
        (c == Component::Char ? s.chars : c == Component::Word ? s.words : s.state) = mode;
        return counts[s.str()][c];
      };
      const auto hard = with(Mode::Hard), soft = with(Mode::Soft), sep = with(Mode::Separate);
      order_errors += !(hard < soft && soft < sep);
      ++comparisons;
    }
  return {failures == 0 && table_errors == 0 && order_errors == 0,
          "27 strategies, " + std::to_string(failures) + " forward/backward failures, " +
              std::to_string(order_errors) + "/" + std::to_string(comparisons) +
              " count orderings violated, " + std::to_string(table_errors) +
              " language-table mismatches"};
}

// 6. Attachment scores and grid reports on fixed inputs.
Outcome metric_fixtures() {
  const std::vector<std::string> forms = {"the", "cat", "ate", "."};
  const std::vector<std::string> labels = {"det", "nsubj", "root", "punct"};
  const Sentence gold = make_sentence("en", forms, {2, 3, 0, 3}, labels);
  const Sentence g2 = make_sentence("en", {"my", "dog"}, {2, 0}, {"nmod:poss", "root"});
  struct Case {
    std::vector<Sentence> gold, predicted;
    double uas, las;
  };
  const Sentence relabeled = make_sentence("en", forms, {2, 3, 0, 3}, {"det", "obj", "root", "punct"});
  const std::vector<Case> cases = {
      {{gold}, {gold}, 100, 100},
      {{gold}, {relabeled}, 100, 75},
      {{gold}, {make_sentence("en", forms, {3, 1, 0, 1}, labels)}, 25, 25},
      {{gold}, {make_sentence("en", forms, {3, 3, 0, 2}, labels)}, 50, 50},
      {{gold, g2}, {relabeled, make_sentence("en", {"my", "dog"}, {2, 0}, {"nmod", "root"})}, 100,
       100.0 * 4 / 6},
  };
  std::size_t exact = 0;
  for (const Case& c : cases) {
    const AttachmentScores s = attachment_scores(c.gold, c.predicted);
    exact += s.uas == c.uas && s.las == c.las;
  }
  const GridReport related = load_grid_csv(BIPARSE_TEST_DATA "/grid_related.csv");
  const GridReport unrelated = load_grid_csv(BIPARSE_TEST_DATA "/grid_unrelated.csv");
  auto avg = [](const GridRow& r) { return format_score(*r.average()); };
  std::size_t top_shared = 0;
  for (std::size_t i = 0; i < 10; ++i) top_shared += related.strategies[i].strategy->state != Mode::Separate;
  const bool grids = avg(related.mono) == "78.2" && avg(related.best()) == "79.1" &&
                     avg(related.language_best) == "79.5" && avg(unrelated.best()) == "78.9" &&
                     avg(unrelated.worst()) == "77.7" && top_shared == 10;
  return {exact == cases.size() && grids,
          std::to_string(exact) + "/5 crafted cases; related Mono " + avg(related.mono) + " Best " +
              avg(related.best()) + " Language-best " + avg(related.language_best) +
              "; unrelated Best " + avg(unrelated.best()) + " Worst " + avg(unrelated.worst()) +
              "; " + std::to_string(top_shared) + "/10 top rows share the MLP"};
}

// 7. Randomization test: identical runs, dominated runs and null calibration.
Outcome randomization() {
  const auto t0 = Clock::now();
  ScoredRun a, b;
  a.system = "a";
  b.system = "b";
  for (int i = 0; i < 60; ++i) {
    a.tokens.push_back(12);
    b.tokens.push_back(12);
    a.correct_heads.push_back(11);
    a.correct_labeled.push_back(10);
    b.correct_heads.push_back(10);
    b.correct_labeled.push_back(8 + i % 2);
  }
  const double same = randomization_test(a, a, 10000);
  const double dominated = randomization_test(a, b, 10000);
  const double ks = ks_uniform(null_p_values(1000, 400, 999, 17));
  const double secs = seconds_since(t0);
  return {same == 1.0 && dominated < 0.01 && ks <= 0.05 && secs < 120,
          "identical p " + fmt("%.3f", same) + ", dominated p " + fmt("%.5f", dominated) +
              ", null KS " + fmt("%.3f", ks) + " over 1000 simulations, " + fmt("%.1fs", secs)};
}

// 8. Dev-selected sharing against monolingual baselines on two pairs.
Outcome ours_direction() {
  const auto t0 = Clock::now();
  double ours = 0, mono = 0;
  std::size_t rows = 0;
  std::string detail;
  for (const char* pair : {"a1,a2", "b1,b2"}) {
    ExperimentConfig c;
    std::istringstream settings(
        "synthetic.train=500\nsynthetic.dev=200\nsynthetic.test=0\nseeds=1,2,3\n"
        "target=all\nepochs=10\nshuffles=1000\nsave_models=false\n"
        "dims.word_dim=32\ndims.char_dim=12\ndims.char_hidden=24\ndims.word_hidden=48\n"
        "dims.lang_dim=6\ndims.mlp_hidden=48\n");
    c.set("languages", pair);
    c.set("synthetic", "true");
    for (std::string line; std::getline(settings, line);) {
      const auto eq = line.find('=');
      c.set(line.substr(0, eq), line.substr(eq + 1));
    }
    const Corpora corpora = load_corpora(c);
    const auto jobs = ours_jobs(c);
    const auto results = run_jobs(jobs, std::max(1u, std::thread::hardware_concurrency()),
                                  [&](const Job& j) { return train_job(c, corpora, j); });
    for (const JobResult& r : results)
      if (!r.ok) return {false, "job " + r.job.name + " failed: " + r.error};
    for (const OursRow& row : ours_from_results(c, results).rows) {
      ours += row.ours;
      mono += row.mono;
      ++rows;
      detail += row.language + " " + std::string(mode_ascii(row.words)) + "/" +
                std::string(mode_ascii(row.chars)) + " delta " + fmt("%+.2f", row.delta()) +
                " (p " + fmt("%.3f", row.p_value) + "); ";
    }
  }
  ours /= static_cast<double>(rows);
  mono /= static_cast<double>(rows);
  return {ours >= mono, detail + "mean Ours " + fmt("%.2f", ours) + " vs Mono " + fmt("%.2f", mono) +
                            ", " + fmt("%.0fs", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool extended = std::getenv("BIPARSE_EXTENDED_TESTS") != nullptr;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (arg == "--extended") extended = true;
    else {
      std::fprintf(stderr, "usage: acceptance [--only N] [--extended]\n");
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle reconstruction", oracle_reconstruction},
      {"dynamic-cost soundness", dynamic_cost_soundness},
      {"gradient fidelity", gradient_fidelity},
      {"capacity/overfit", overfit},
      {"sharing-lattice structure", sharing_lattice},
      {"metric fixtures", metric_fixtures},
      {"randomization test", randomization},
      {"Ours vs Mono direction", ours_direction},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int number = static_cast<int>(k) + 1;
    if (only && number != only) continue;
    const auto& [name, run] = criteria[k];
    if (number == 8 && !extended && only != 8) {
      std::printf("criterion %d: SKIPPED %s (extended suite: BIPARSE_EXTENDED_TESTS or --only 8)\n",
                  number, name.c_str());
      continue;
    }
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s %s: %s\n", number, o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
