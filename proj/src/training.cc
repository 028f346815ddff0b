#include "biparse/training.h"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "biparse/common.h"
#include "biparse/evaluation.h"

namespace biparse {

void TrainConfig::validate() const {
  if (sample_size == 0) throw ConfigError("sample size must be at least 1");
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (!(explore_probability >= 0.0 && explore_probability <= 1.0))
    throw ConfigError("exploration probability must lie in [0, 1]");
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(word_dropout >= 0.0)) throw ConfigError("word dropout must be non-negative");
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  dims.validate();
}

const EpochRecord& TrainReport::best() const {
  for (const EpochRecord& e : epochs)
    if (e.epoch == best_epoch) return e;
  throw UsageError("train report has no epoch " + std::to_string(best_epoch));
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::string TrainReport::serialize() const {
  std::ostringstream out;
  out << "strategy=" << strategy << '\n';
  out << "languages=" << join(languages) << '\n';
  std::vector<std::string> sizes;
  for (std::size_t n : train_sentences) sizes.push_back(std::to_string(n));
  out << "train_sentences=" << join(sizes) << '\n';
  for (const EpochRecord& e : epochs) {
    out << "epoch=" << e.epoch << " loss=" << fixed(e.loss, 6)
        << " steps=" << e.steps;
    for (std::size_t k = 0; k < e.dev_las.size(); ++k)
      out << " dev_las." << languages.at(k) << '=' << fixed(e.dev_las[k], 4);
    out << " mean_dev_las=" << fixed(e.mean_dev_las, 4) << '\n';
  }
  out << "best_epoch=" << best_epoch << '\n';
  out << "checkpoint=" << checkpoint << '\n';
  return out.str();
}

TrainReport TrainReport::parse(const std::string& text) {
  TrainReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("train report line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "strategy") {
      r.strategy = value;
    } else if (key == "languages") {
      r.languages = split(value, ',');
    } else if (key == "train_sentences") {
      for (const auto& n : split(value, ',')) r.train_sentences.push_back(std::stoul(n));
    } else if (key == "best_epoch") {
      r.best_epoch = std::stoul(value);
    } else if (key == "checkpoint") {
      r.checkpoint = value;
    } else if (key == "epoch") {
      EpochRecord e;
      e.dev_las.assign(r.languages.size(), 0.0);
      for (const auto& field : split(line, ' ')) {
        const auto p = field.find('=');
        if (p == std::string::npos) continue;
        const std::string k = field.substr(0, p), v = field.substr(p + 1);
        if (k == "epoch") e.epoch = std::stoul(v);
        else if (k == "loss") e.loss = std::stod(v);
        else if (k == "steps") e.steps = std::stoul(v);
        else if (k == "mean_dev_las") e.mean_dev_las = std::stod(v);
        else if (k.rfind("dev_las.", 0) == 0) {
          auto it = std::find(r.languages.begin(), r.languages.end(), k.substr(8));
          if (it == r.languages.end()) throw FormatError("train report: unknown language in " + k);
          e.dev_las[it - r.languages.begin()] = std::stod(v);
        }
      }
      r.epochs.push_back(e);
    } else {
      throw FormatError("train report: unknown key " + key);
    }
  }
  return r;
}

std::vector<int> action_costs(const ParserModel& model, const Configuration& c,
                              const GoldTree& gold, std::span<const int> order) {
  const std::size_t L = model.num_labels();
  std::vector<int> costs(model.num_actions(), -1);
  const MoveSet legal = legal_moves(c);
  if (has(legal, Move::Shift)) costs[0] = dynamic_cost(c, {Move::Shift, -1}, gold, order);
  if (has(legal, Move::Swap)) costs[1] = dynamic_cost(c, {Move::Swap, -1}, gold, order);
  for (Move m : {Move::LeftArc, Move::RightArc}) {
    if (!has(legal, m)) continue;
    const int s0 = c.stack().back();
    const int gold_label = gold.labels[s0];
    // the label only matters when the arc itself is gold
    const int head = m == Move::LeftArc ? c.buffer_front() : c.stack_at(1);
    const bool gold_arc = gold.heads[s0] == head;
    const int base = dynamic_cost(c, {m, gold_label}, gold, order);
    const std::size_t offset = m == Move::LeftArc ? 2 : 2 + L;
    for (std::size_t l = 0; l < L; ++l) {
      const int label = static_cast<int>(l);
      costs[offset + l] = gold_arc && label != gold_label
                              ? dynamic_cost(c, {m, label}, gold, order)
                              : base;
    }
  }
  return costs;
}

namespace {

struct HingeChoice {
  int correct = -1;
  int wrong = -1;
  double value = 0;
};

HingeChoice hinge_choice(std::span<const real> scores, std::span<const int> costs,
                         double margin) {
  if (scores.size() != costs.size())
    throw DimensionError("hinge loss: " + std::to_string(scores.size()) +
                         " scores for " + std::to_string(costs.size()) + " costs");
  HingeChoice h;
  for (std::size_t a = 0; a < costs.size(); ++a) {
    if (costs[a] < 0) continue;
    int& slot = costs[a] == 0 ? h.correct : h.wrong;
    if (slot < 0 || scores[a] > scores[slot]) slot = static_cast<int>(a);
  }
  if (h.correct < 0) throw OracleError("no zero-cost legal action");
  if (h.wrong >= 0)
    h.value = std::max(0.0, margin - static_cast<double>(scores[h.correct]) +
                                static_cast<double>(scores[h.wrong]));
  return h;
}

std::vector<int> normalized(std::vector<int> costs) {
  int lo = std::numeric_limits<int>::max();
  for (int c : costs)
    if (c >= 0) lo = std::min(lo, c);
  for (int& c : costs)
    if (c >= 0) c -= lo;
  return costs;
}

}  // namespace

double hinge_loss(std::span<const real> scores, std::span<const int> costs,
                  double margin) {
  return hinge_choice(scores, costs, margin).value;
}

std::optional<Expr> hinge_loss(Graph& g, Expr scores, std::span<const int> costs,
                               double margin) {
  const HingeChoice h = hinge_choice(g.value(scores), costs, margin);
  if (h.value <= 0) return std::nullopt;
  Expr diff = g.sub(g.pick(scores, static_cast<std::size_t>(h.wrong)),
                    g.pick(scores, static_cast<std::size_t>(h.correct)));
  return g.add(diff, g.input({static_cast<real>(margin)}));
}

namespace {

std::size_t argmax_where(std::span<const real> scores, std::span<const int> costs,
                         bool zero_cost_only) {
  std::size_t best = costs.size();
  for (std::size_t a = 0; a < costs.size(); ++a) {
    if (costs[a] < 0 || (zero_cost_only && costs[a] != 0)) continue;
    if (best == costs.size() || scores[a] > scores[best]) best = a;
  }
  if (best == costs.size()) throw OracleError("no candidate action");
  return best;
}

Expr total_loss(Graph& g, const std::vector<Expr>& terms) {
  if (terms.empty()) return g.input({real(0)});
  return g.sum_of(terms);
}

}  // namespace

SentenceResult train_sentence(ParserModel& model, const Sentence& sentence,
                              int lang, const SentenceOptions& options,
                              std::mt19937_64& rng) {
  const GoldTree gold = gold_tree(sentence, model.lexicon().labels);
  for (std::size_t i = 1; i < gold.labels.size(); ++i)
    if (gold.labels[i] < 0)
      throw ConfigError("label '" + sentence.tokens[i - 1].label +
                        "' is not in the model's label set");
  const std::vector<int> order = projective_order(gold.heads);
  Graph g;
  const EncodedSentence enc = model.sentence_encode(g, sentence, lang, options.word_ids);
  Configuration c = initial_config(sentence);
  std::vector<Expr> terms;
  SentenceResult result;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (!c.terminal()) {
    Expr scores = model.score(g, model.extract_features(g, c, enc, lang), lang);
    const std::vector<int> costs = normalized(action_costs(model, c, gold, order));
    if (auto loss = hinge_loss(g, scores, costs, options.margin)) terms.push_back(*loss);
    std::size_t next;
    if (swap_needed(c, order)) {
      next = 1;
    } else {
      const auto values = g.value(scores);
      const bool explore = options.explore && options.explore_probability > 0 &&
                           coin(rng) < options.explore_probability;
      next = argmax_where(values, costs, !explore);
    }
    const Transition t = model.action(next);
    result.transitions.push_back(t);
    c.apply(t);
    ++result.steps;
  }
  Expr loss = total_loss(g, terms);
  result.loss = g.scalar(loss);
  if (!terms.empty()) g.backward(loss);
  return result;
}

Expr trajectory_loss(Graph& g, const ParserModel& model, const Sentence& sentence,
                     int lang, std::span<const Transition> transitions,
                     double margin) {
  const GoldTree gold = gold_tree(sentence, model.lexicon().labels);
  const std::vector<int> order = projective_order(gold.heads);
  const EncodedSentence enc = model.sentence_encode(g, sentence, lang);
  Configuration c = initial_config(sentence);
  std::vector<Expr> terms;
  for (const Transition& t : transitions) {
    Expr scores = model.score(g, model.extract_features(g, c, enc, lang), lang);
    const std::vector<int> costs = normalized(action_costs(model, c, gold, order));
    if (auto loss = hinge_loss(g, scores, costs, margin)) terms.push_back(*loss);
    c.apply(t);
  }
  return total_loss(g, terms);
}

Sentence parse(const ParserModel& model, const Sentence& sentence, int lang) {
  Graph g(false);
  const EncodedSentence enc = model.sentence_encode(g, sentence, lang);
  Configuration c = initial_config(sentence);
  std::vector<int> legal(model.num_actions());
  const std::size_t L = model.num_labels();
  while (!c.terminal()) {
    Expr scores = model.score(g, model.extract_features(g, c, enc, lang), lang);
    const MoveSet moves = legal_moves(c);
    std::fill(legal.begin(), legal.end(), -1);
    if (has(moves, Move::Shift)) legal[0] = 0;
    if (has(moves, Move::Swap)) legal[1] = 0;
    if (has(moves, Move::LeftArc)) std::fill(legal.begin() + 2, legal.begin() + 2 + L, 0);
    if (has(moves, Move::RightArc)) std::fill(legal.begin() + 2 + L, legal.end(), 0);
    c.apply(model.action(argmax_where(g.value(scores), legal, true)));
  }
  Sentence out = sentence;
  std::vector<int> heads(sentence.size() + 1, -1);
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    Token& tok = out.tokens[i];
    tok.head = c.head(static_cast<int>(i + 1));
    tok.label = model.lexicon().labels.str(c.label(static_cast<int>(i + 1)));
    heads[i + 1] = tok.head;
  }
  validate_tree(heads, "parser output");
  return out;
}

std::vector<Sentence> parse_all(const ParserModel& model,
                                std::span<const Sentence> sentences, int lang) {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) out.push_back(parse(model, s, lang));
  return out;
}

std::vector<int> word_dropout(const ParserModel& model, const Sentence& s,
                              int lang, double alpha, std::mt19937_64& rng) {
  const Vocabulary& vocab = model.lexicon().word_vocab(lang);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<int> ids;
  ids.reserve(s.size());
  for (const Token& t : s.tokens) {
    int id = vocab.id(t.form);
    if (id != Vocabulary::kUnk && alpha > 0) {
      const double freq = static_cast<double>(vocab.frequency(id));
      if (coin(rng) < alpha / (alpha + freq)) id = Vocabulary::kUnk;
    }
    ids.push_back(id);
  }
  return ids;
}

TrainResult train(const TrainConfig& config, std::span<const LanguageData> data,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (data.empty() || data.size() > 2)
    throw ConfigError("training takes one or two languages");
  for (const LanguageData& d : data) {
    if (d.train.empty()) throw ConfigError("no training data for " + d.language);
    if (d.dev.empty()) throw ConfigError("missing dev data for " + d.language);
  }
  if (data.size() == 2 && data[0].language == data[1].language)
    throw ConfigError("the two languages must differ");
  SharingStrategy strategy = data.size() == 1 ? SharingStrategy{} : config.strategy;

  std::vector<std::vector<Sentence>> samples;
  std::vector<LanguageCorpus> corpora;
  for (const LanguageData& d : data)
    samples.push_back(sample_training(d.train, config.sample_size,
                                      fnv1a(d.language, config.seed)));
  for (std::size_t k = 0; k < data.size(); ++k)
    corpora.push_back({data[k].language, samples[k]});

  ParserModel model(strategy, build_lexicon(corpora, strategy), config.dims,
                    config.seed);
  Optimizer optimizer(config.optimizer);
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  TrainReport report;
  report.strategy = strategy.str();
  for (std::size_t k = 0; k < data.size(); ++k) {
    report.languages.push_back(data[k].language);
    report.train_sentences.push_back(samples[k].size());
  }

  std::vector<std::pair<int, std::size_t>> stream;
  for (std::size_t k = 0; k < samples.size(); ++k)
    for (std::size_t i = 0; i < samples[k].size(); ++i)
      stream.emplace_back(static_cast<int>(k), i);

  std::vector<std::vector<real>> best_values;
  double best_mean = -1;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(stream.begin(), stream.end(), rng);
    EpochRecord record;
    record.epoch = epoch;
    SentenceOptions options;
    options.explore = config.explore && epoch >= config.explore_from_epoch;
    options.explore_probability = config.explore_probability;
    options.margin = config.margin;
    for (const auto& [lang, index] : stream) {
      const Sentence& s = samples[lang][index];
      const std::vector<int> ids = word_dropout(model, s, lang, config.word_dropout, rng);
      options.word_ids = ids;
      SentenceResult r = train_sentence(model, s, lang, options, rng);
      record.loss += r.loss;
      record.steps += r.steps;
      if (r.loss > 0) optimizer.step(model.parameters());
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto predicted = parse_all(model, data[k].dev, static_cast<int>(k));
      record.dev_las.push_back(attachment_scores(data[k].dev, predicted).las);
    }
    record.mean_dev_las =
        std::accumulate(record.dev_las.begin(), record.dev_las.end(), 0.0) /
        static_cast<double>(record.dev_las.size());
    if (record.mean_dev_las > best_mean) {
      best_mean = record.mean_dev_las;
      report.best_epoch = epoch;
      best_values = model.snapshot();
    }
    report.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
    if (config.stop_at_las > 0 && record.mean_dev_las >= config.stop_at_las) break;
  }
  model.restore(best_values);
  if (!config.checkpoint.empty()) {
    model.save(config.checkpoint);
    report.checkpoint = config.checkpoint;
  }
  return TrainResult{std::move(report), std::move(model)};
}

}  // namespace biparse
