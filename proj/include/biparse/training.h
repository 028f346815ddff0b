#ifndef BIPARSE_TRAINING_H_
#define BIPARSE_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "biparse/autodiff.h"
#include "biparse/conllu.h"
#include "biparse/model.h"
#include "biparse/optimizer.h"
#include "biparse/sharing.h"
#include "biparse/transition.h"

namespace biparse {

struct TrainConfig {
  SharingStrategy strategy;
  std::size_t sample_size = 5000;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  double word_dropout = 0.25;
  std::size_t explore_from_epoch = 2;  // 1-based
  double explore_probability = 0.1;
  bool explore = true;
  double margin = 1.0;
  // Stop once the mean dev LAS reaches this value (0 disables).
  double stop_at_las = 0.0;
  OptimizerConfig optimizer;
  ModelDims dims;
  std::string checkpoint;  // empty: do not write

  void validate() const;
};

struct LanguageData {
  std::string language;
  std::vector<Sentence> train;
  std::vector<Sentence> dev;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0;
  std::size_t steps = 0;
  std::vector<double> dev_las;  // per language, model order
  double mean_dev_las = 0;
};

struct TrainReport {
  std::string strategy;
  std::vector<std::string> languages;
  std::vector<std::size_t> train_sentences;  // sampled, per language
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::string checkpoint;

  const EpochRecord& best() const;
  // Line-oriented "key=value" records, one line per epoch.
  std::string serialize() const;
  static TrainReport parse(const std::string& text);
};

// Per-action cost (indexed as ParserModel::action_index) under the
// order-aware oracle; -1 marks illegal actions.
std::vector<int> action_costs(const ParserModel& model, const Configuration& c,
                              const GoldTree& gold, std::span<const int> order);

// max(0, m - best zero-cost score + best positive-cost score) over legal
// actions (cost >= 0); 0 when every legal action is zero-cost. Throws
// OracleError when no legal action has zero cost.
double hinge_loss(std::span<const real> scores, std::span<const int> costs,
                  double margin);

// Graph form of hinge_loss; returns no expression when the loss is zero.
std::optional<Expr> hinge_loss(Graph& g, Expr scores, std::span<const int> costs,
                               double margin);

struct SentenceOptions {
  bool explore = false;
  double explore_probability = 0.0;
  double margin = 1.0;
  std::span<const int> word_ids;  // word-dropout override, may be empty
};

struct SentenceResult {
  double loss = 0;
  std::size_t steps = 0;
  std::vector<Transition> transitions;
};

// Walks one sentence under oracle supervision and back-propagates the summed
// hinge loss into the model's parameter gradients (nothing when it is 0).
SentenceResult train_sentence(ParserModel& model, const Sentence& sentence,
                              int lang, const SentenceOptions& options,
                              std::mt19937_64& rng);

// Summed hinge loss along a fixed transition sequence, as a graph expression
// (zero-valued input when no step has a loss).
Expr trajectory_loss(Graph& g, const ParserModel& model, const Sentence& sentence,
                     int lang, std::span<const Transition> transitions,
                     double margin);

// Greedy decoding; the result carries predicted HEAD and DEPREL.
Sentence parse(const ParserModel& model, const Sentence& sentence, int lang);
std::vector<Sentence> parse_all(const ParserModel& model,
                                std::span<const Sentence> sentences, int lang);

// Word ids with UNK substituted at probability alpha / (alpha + freq(w)).
std::vector<int> word_dropout(const ParserModel& model, const Sentence& s,
                              int lang, double alpha, std::mt19937_64& rng);

struct TrainResult {
  TrainReport report;
  ParserModel model;  // parameters of the best epoch
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// One language trains a monolingual model (the strategy is then forced to
// fully separate). Throws ConfigError when a language has no dev data.
TrainResult train(const TrainConfig& config, std::span<const LanguageData> data,
                  const EpochCallback& on_epoch = {});

}  // namespace biparse

#endif  // BIPARSE_TRAINING_H_
