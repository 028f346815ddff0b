#ifndef BIPARSE_MODEL_H_
#define BIPARSE_MODEL_H_

// The parser network: a character BiLSTM (C), a two-layer word BiLSTM (W) and
// a pair of interpolated MLP scorers over configuration features (S), each
// either separate per language, hard-shared, or soft-shared with a language
// embedding concatenated at its input.
//
// Tensors are named "<component>/<scope>/<name>", where component is char,
// word or state and scope is "shared" or a language code.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "biparse/autodiff.h"
#include "biparse/lexicon.h"
#include "biparse/lstm.h"
#include "biparse/sharing.h"
#include "biparse/transition.h"

namespace biparse {

struct ModelDims {
  std::size_t word_dim = 100;
  std::size_t char_dim = 24;
  std::size_t char_hidden = 50;   // per direction
  std::size_t word_hidden = 125;  // per direction
  std::size_t word_layers = 2;
  std::size_t lang_dim = 12;
  std::size_t mlp_hidden = 100;
  std::size_t stack_items = 3;
  std::size_t buffer_items = 1;
  double interpolation = 0.5;  // weight of the unlabeled scorer

  void validate() const;
  nlohmann::json to_json() const;
  static ModelDims from_json(const nlohmann::json& j);
};

enum class Component { Char, Word, State };

std::string_view component_name(Component c);

// Encoded sentence: vectors[0] is the ROOT vector, vectors[i] the word BiLSTM
// output for token i; pad fills absent feature slots.
struct EncodedSentence {
  std::vector<Expr> vectors;
  Expr pad;
};

class ParserModel {
 public:
  // Throws ConfigError when the lexicon was built for a different sharing of
  // the word or character maps.
  ParserModel(SharingStrategy strategy, Lexicon lexicon, ModelDims dims,
              std::uint64_t seed);

  ParserModel(const ParserModel&) = delete;
  ParserModel& operator=(const ParserModel&) = delete;
  ParserModel(ParserModel&&) = default;
  ParserModel& operator=(ParserModel&&) = default;

  const SharingStrategy& strategy() const { return strategy_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const ModelDims& dims() const { return dims_; }
  ParameterStore& parameters() { return *store_; }
  const ParameterStore& parameters() const { return *store_; }
  std::size_t num_languages() const { return lexicon_.languages.size(); }
  int language_id(const std::string& code) const {
    return lexicon_.language_id(code);
  }

  std::size_t num_labels() const { return lexicon_.labels.size(); }
  // SHIFT, SWAP, LEFT-ARC_l for each label, RIGHT-ARC_l for each label.
  std::size_t num_actions() const { return 2 + 2 * num_labels(); }
  std::size_t action_index(Transition t) const;
  Transition action(std::size_t index) const;

  std::size_t parameter_count(Component c) const;
  std::size_t parameter_count() const { return store_->parameter_count(); }
  // Scopes present for a component ("shared" or language codes).
  std::vector<std::string> scopes(Component c) const;
  bool has_language_table(Component c) const;

  std::size_t char_input_dim() const;
  std::size_t word_input_dim() const;
  std::size_t feature_dim() const;

  Expr char_encode(Graph& g, std::string_view form, int lang) const;
  // word_ids, when given, overrides the lexicon lookup per token (used for
  // word dropout during training).
  EncodedSentence sentence_encode(Graph& g, const Sentence& s, int lang,
                                  std::span<const int> word_ids = {}) const;
  Expr extract_features(Graph& g, const Configuration& c,
                        const EncodedSentence& enc, int lang) const;
  // Interpolated scores over all actions (see action_index).
  Expr score(Graph& g, Expr features, int lang) const;

  // Header JSON + parameters; load validates the lexicon hash.
  void save(const std::string& path) const;
  static ParserModel load(const std::string& path);

  // Value snapshot for best-epoch restoring.
  std::vector<std::vector<real>> snapshot() const;
  void restore(const std::vector<std::vector<real>>& values);

 private:
  struct CharNet {
    Tensor* embeddings = nullptr;
    BiLstmLayer lstm;
  };
  struct WordNet {
    Tensor* embeddings = nullptr;
    std::vector<BiLstmLayer> layers;
    Tensor* root = nullptr;
    Tensor* pad = nullptr;
  };
  struct Mlp {
    Tensor* hidden_w = nullptr;
    Tensor* hidden_b = nullptr;
    Tensor* out_w = nullptr;
    Tensor* out_b = nullptr;
  };
  struct StateNet {
    Mlp unlabeled;
    Mlp labeled;
  };

  std::string scope_name(Mode m, int lang) const;
  std::size_t slot(Mode m, int lang) const {
    return m == Mode::Separate ? static_cast<std::size_t>(lang) : 0;
  }
  void check_language(int lang) const;
  Expr language_vector(Graph& g, Tensor* table, int lang) const;
  Expr run_mlp(Graph& g, const Mlp& mlp, Expr x) const;

  SharingStrategy strategy_;
  Lexicon lexicon_;
  ModelDims dims_;
  std::unique_ptr<ParameterStore> store_;
  std::vector<CharNet> char_nets_;
  std::vector<WordNet> word_nets_;
  std::vector<StateNet> state_nets_;
  Tensor* char_lang_ = nullptr;
  Tensor* word_lang_ = nullptr;
  Tensor* state_lang_ = nullptr;
  std::vector<std::size_t> unlabeled_index_;
};

}  // namespace biparse

#endif  // BIPARSE_MODEL_H_
