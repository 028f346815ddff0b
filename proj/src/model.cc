#include "biparse/model.h"

#include <random>

#include "biparse/archive.h"
#include "biparse/common.h"

namespace biparse {

void ModelDims::validate() const {
  if (!word_dim || !char_dim || !char_hidden || !word_hidden || !word_layers ||
      !lang_dim || !mlp_hidden || !stack_items || !buffer_items)
    throw ConfigError("all model dimensions must be positive");
  if (!(interpolation >= 0.0 && interpolation <= 1.0))
    throw ConfigError("interpolation weight must lie in [0, 1]");
}

nlohmann::json ModelDims::to_json() const {
  return nlohmann::json{{"word_dim", word_dim},       {"char_dim", char_dim},
                        {"char_hidden", char_hidden}, {"word_hidden", word_hidden},
                        {"word_layers", word_layers}, {"lang_dim", lang_dim},
                        {"mlp_hidden", mlp_hidden},   {"stack_items", stack_items},
                        {"buffer_items", buffer_items},
                        {"interpolation", interpolation}};
}

ModelDims ModelDims::from_json(const nlohmann::json& j) {
  ModelDims d;
  d.word_dim = j.at("word_dim");
  d.char_dim = j.at("char_dim");
  d.char_hidden = j.at("char_hidden");
  d.word_hidden = j.at("word_hidden");
  d.word_layers = j.at("word_layers");
  d.lang_dim = j.at("lang_dim");
  d.mlp_hidden = j.at("mlp_hidden");
  d.stack_items = j.at("stack_items");
  d.buffer_items = j.at("buffer_items");
  d.interpolation = j.at("interpolation");
  d.validate();
  return d;
}

std::string_view component_name(Component c) {
  switch (c) {
    case Component::Char: return "char";
    case Component::Word: return "word";
    case Component::State: return "state";
  }
  return "?";
}

ParserModel::ParserModel(SharingStrategy strategy, Lexicon lexicon,
                         ModelDims dims, std::uint64_t seed)
    : strategy_(strategy), lexicon_(std::move(lexicon)), dims_(dims),
      store_(std::make_unique<ParameterStore>()) {
  dims_.validate();
  const std::size_t n_lang = lexicon_.languages.size();
  if (n_lang == 0) throw ConfigError("model needs at least one language");
  if (lexicon_.words_shared != (strategy_.words != Mode::Separate) ||
      lexicon_.chars_shared != (strategy_.chars != Mode::Separate))
    throw ConfigError("lexicon was built for a different sharing strategy than " +
                      strategy_.str());
  if (lexicon_.words.size() != (lexicon_.words_shared ? 1 : n_lang) ||
      lexicon_.chars.size() != (lexicon_.chars_shared ? 1 : n_lang))
    throw ConfigError("lexicon tables do not match its language count");
  if (lexicon_.labels.size() == 0)
    throw ConfigError("lexicon has no dependency labels");

  std::mt19937_64 rng(seed);
  ParameterStore& st = *store_;
  auto copies = [&](Mode m) { return m == Mode::Separate ? n_lang : 1; };
  auto name = [&](Component c, Mode m, std::size_t k, const std::string& what) {
    return std::string(component_name(c)) + "/" +
           scope_name(m, static_cast<int>(k)) + "/" + what;
  };

  // C
  const Mode cm = strategy_.chars;
  if (cm == Mode::Soft) {
    char_lang_ = &st.add("char/shared/lang_embeddings", Shape{n_lang, dims_.lang_dim});
    glorot_uniform(*char_lang_, rng);
  }
  for (std::size_t k = 0; k < copies(cm); ++k) {
    CharNet net;
    net.embeddings = &st.add(name(Component::Char, cm, k, "embeddings"),
                             Shape{lexicon_.chars[k].size(), dims_.char_dim});
    glorot_uniform(*net.embeddings, rng);
    net.lstm = add_bilstm(st, name(Component::Char, cm, k, "lstm"),
                          char_input_dim(), dims_.char_hidden);
    init_lstm(net.lstm.forward, rng);
    init_lstm(net.lstm.backward, rng);
    char_nets_.push_back(net);
  }

  // W
  const Mode wm = strategy_.words;
  if (wm == Mode::Soft) {
    word_lang_ = &st.add("word/shared/lang_embeddings", Shape{n_lang, dims_.lang_dim});
    glorot_uniform(*word_lang_, rng);
  }
  for (std::size_t k = 0; k < copies(wm); ++k) {
    WordNet net;
    net.embeddings = &st.add(name(Component::Word, wm, k, "embeddings"),
                             Shape{lexicon_.words[k].size(), dims_.word_dim});
    glorot_uniform(*net.embeddings, rng);
    std::size_t in = word_input_dim();
    for (std::size_t l = 0; l < dims_.word_layers; ++l) {
      BiLstmLayer layer = add_bilstm(
          st, name(Component::Word, wm, k, "lstm" + std::to_string(l)), in,
          dims_.word_hidden);
      init_lstm(layer.forward, rng);
      init_lstm(layer.backward, rng);
      net.layers.push_back(layer);
      in = 2 * dims_.word_hidden;
    }
    net.root = &st.add(name(Component::Word, wm, k, "root"),
                       Shape{2 * dims_.word_hidden, 1});
    glorot_uniform(*net.root, rng);
    net.pad = &st.add(name(Component::Word, wm, k, "pad"),
                      Shape{2 * dims_.word_hidden, 1});
    glorot_uniform(*net.pad, rng);
    word_nets_.push_back(net);
  }

  // S
  const Mode sm = strategy_.state;
  if (sm == Mode::Soft) {
    state_lang_ = &st.add("state/shared/lang_embeddings", Shape{n_lang, dims_.lang_dim});
    glorot_uniform(*state_lang_, rng);
  }
  auto make_mlp = [&](const std::string& prefix, std::size_t out) {
    Mlp m;
    m.hidden_w = &st.add(prefix + "/hidden_W", Shape{dims_.mlp_hidden, feature_dim()});
    m.hidden_b = &st.add(prefix + "/hidden_b", Shape{dims_.mlp_hidden, 1});
    m.out_w = &st.add(prefix + "/out_W", Shape{out, dims_.mlp_hidden});
    m.out_b = &st.add(prefix + "/out_b", Shape{out, 1});
    glorot_uniform(*m.hidden_w, rng);
    glorot_uniform(*m.out_w, rng);
    return m;
  };
  for (std::size_t k = 0; k < copies(sm); ++k) {
    StateNet net;
    net.unlabeled = make_mlp(name(Component::State, sm, k, "unlabeled"), 4);
    net.labeled = make_mlp(name(Component::State, sm, k, "labeled"), num_actions());
    state_nets_.push_back(net);
  }

  // unlabeled outputs: SHIFT, SWAP, LEFT-ARC, RIGHT-ARC
  const std::size_t L = num_labels();
  unlabeled_index_ = {0, 1};
  unlabeled_index_.insert(unlabeled_index_.end(), L, 2);
  unlabeled_index_.insert(unlabeled_index_.end(), L, 3);
}

std::string ParserModel::scope_name(Mode m, int lang) const {
  return m == Mode::Separate ? lexicon_.languages.at(lang) : "shared";
}

void ParserModel::check_language(int lang) const {
  if (lang < 0 || lang >= static_cast<int>(num_languages()))
    throw UsageError("language id " + std::to_string(lang) +
                     " is not part of this model");
}

std::size_t ParserModel::action_index(Transition t) const {
  const std::size_t L = num_labels();
  switch (t.move) {
    case Move::Shift: return 0;
    case Move::Swap: return 1;
    case Move::LeftArc:
      if (t.label < 0 || t.label >= static_cast<int>(L))
        throw UsageError("LEFT-ARC without a valid label");
      return 2 + static_cast<std::size_t>(t.label);
    case Move::RightArc:
      if (t.label < 0 || t.label >= static_cast<int>(L))
        throw UsageError("RIGHT-ARC without a valid label");
      return 2 + L + static_cast<std::size_t>(t.label);
  }
  return 0;
}

Transition ParserModel::action(std::size_t index) const {
  const std::size_t L = num_labels();
  if (index == 0) return {Move::Shift, -1};
  if (index == 1) return {Move::Swap, -1};
  if (index < 2 + L) return {Move::LeftArc, static_cast<int>(index - 2)};
  if (index < 2 + 2 * L) return {Move::RightArc, static_cast<int>(index - 2 - L)};
  throw UsageError("action index out of range");
}

std::size_t ParserModel::parameter_count(Component c) const {
  const std::string prefix = std::string(component_name(c)) + "/";
  std::size_t n = 0;
  for (const auto& [name, t] : *store_)
    if (name.compare(0, prefix.size(), prefix) == 0) n += t->size();
  return n;
}

std::vector<std::string> ParserModel::scopes(Component c) const {
  const std::string prefix = std::string(component_name(c)) + "/";
  std::vector<std::string> out;
  for (const auto& [name, t] : *store_) {
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    auto rest = name.substr(prefix.size());
    auto scope = rest.substr(0, rest.find('/'));
    if (out.empty() || out.back() != scope) out.push_back(scope);
  }
  return out;
}

bool ParserModel::has_language_table(Component c) const {
  switch (c) {
    case Component::Char: return char_lang_ != nullptr;
    case Component::Word: return word_lang_ != nullptr;
    case Component::State: return state_lang_ != nullptr;
  }
  return false;
}

std::size_t ParserModel::char_input_dim() const {
  return dims_.char_dim + (strategy_.chars == Mode::Soft ? dims_.lang_dim : 0);
}

std::size_t ParserModel::word_input_dim() const {
  return dims_.word_dim + 2 * dims_.char_hidden +
         (strategy_.words == Mode::Soft ? dims_.lang_dim : 0);
}

std::size_t ParserModel::feature_dim() const {
  return (dims_.stack_items + dims_.buffer_items) * 2 * dims_.word_hidden +
         (strategy_.state == Mode::Soft ? dims_.lang_dim : 0);
}

Expr ParserModel::language_vector(Graph& g, Tensor* table, int lang) const {
  return g.lookup(*table, static_cast<std::size_t>(lang));
}

Expr ParserModel::char_encode(Graph& g, std::string_view form, int lang) const {
  check_language(lang);
  if (form.empty()) throw UsageError("char_encode: empty word form");
  const CharNet& net = char_nets_[slot(strategy_.chars, lang)];
  const Vocabulary& vocab = lexicon_.char_vocab(lang);
  Expr lang_vec;
  if (strategy_.chars == Mode::Soft) lang_vec = language_vector(g, char_lang_, lang);
  std::vector<Expr> inputs;
  for (const std::string& ch : utf8_characters(form)) {
    Expr e = g.lookup(*net.embeddings, static_cast<std::size_t>(vocab.id(ch)));
    inputs.push_back(lang_vec.valid() ? g.concat({e, lang_vec}) : e);
  }
  return bilstm_final(g, net.lstm, inputs);
}

EncodedSentence ParserModel::sentence_encode(Graph& g, const Sentence& s,
                                             int lang,
                                             std::span<const int> word_ids) const {
  check_language(lang);
  if (s.tokens.empty()) throw UsageError("sentence_encode: empty sentence");
  if (!word_ids.empty() && word_ids.size() != s.size())
    throw UsageError("sentence_encode: word id override has wrong length");
  const WordNet& net = word_nets_[slot(strategy_.words, lang)];
  const Vocabulary& vocab = lexicon_.word_vocab(lang);
  Expr lang_vec;
  if (strategy_.words == Mode::Soft) lang_vec = language_vector(g, word_lang_, lang);
  std::vector<Expr> xs;
  xs.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Token& t = s.tokens[i];
    const int id = word_ids.empty() ? vocab.id(t.form) : word_ids[i];
    Expr e = g.lookup(*net.embeddings, static_cast<std::size_t>(id));
    Expr ch = char_encode(g, t.form, lang);
    xs.push_back(lang_vec.valid() ? g.concat({e, ch, lang_vec}) : g.concat({e, ch}));
  }
  EncodedSentence enc;
  enc.vectors.push_back(g.parameter(*net.root));
  auto vs = bilstm_encode(g, net.layers, xs);
  enc.vectors.insert(enc.vectors.end(), vs.begin(), vs.end());
  enc.pad = g.parameter(*net.pad);
  return enc;
}

Expr ParserModel::extract_features(Graph& g, const Configuration& c,
                                   const EncodedSentence& enc, int lang) const {
  check_language(lang);
  if (enc.vectors.size() != c.length() + 1)
    throw UsageError("extract_features: encoding covers " +
                     std::to_string(enc.vectors.size() - 1) +
                     " tokens but the configuration has " +
                     std::to_string(c.length()));
  std::vector<Expr> parts;
  parts.reserve(dims_.stack_items + dims_.buffer_items + 1);
  for (std::size_t k = dims_.stack_items; k-- > 0;) {
    const int node = c.stack_at(k);
    parts.push_back(node < 0 ? enc.pad : enc.vectors[node]);
  }
  for (std::size_t k = 0; k < dims_.buffer_items; ++k) {
    const int node = c.buffer_at(k);
    parts.push_back(node < 0 ? enc.pad : enc.vectors[node]);
  }
  if (strategy_.state == Mode::Soft)
    parts.push_back(language_vector(g, state_lang_, lang));
  return g.concat(parts);
}

Expr ParserModel::run_mlp(Graph& g, const Mlp& mlp, Expr x) const {
  Expr h = g.tanh(g.affine(g.parameter(*mlp.hidden_w), x,
                           g.parameter(*mlp.hidden_b)));
  return g.affine(g.parameter(*mlp.out_w), h, g.parameter(*mlp.out_b));
}

Expr ParserModel::score(Graph& g, Expr features, int lang) const {
  check_language(lang);
  if (g.shape(features).rows != feature_dim())
    throw DimensionError("score: feature vector " + g.shape(features).str() +
                         " but the classifier expects " +
                         std::to_string(feature_dim()));
  const StateNet& net = state_nets_[slot(strategy_.state, lang)];
  Expr u = run_mlp(g, net.unlabeled, features);
  Expr v = run_mlp(g, net.labeled, features);
  const real lambda = static_cast<real>(dims_.interpolation);
  return g.add(g.scale(g.gather(u, unlabeled_index_), lambda),
               g.scale(v, real(1) - lambda));
}

std::vector<std::vector<real>> ParserModel::snapshot() const {
  std::vector<std::vector<real>> out;
  out.reserve(store_->size());
  for (const auto& [name, t] : *store_) {
    auto v = t->values();
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

void ParserModel::restore(const std::vector<std::vector<real>>& values) {
  if (values.size() != store_->size())
    throw UsageError("snapshot does not match the model");
  std::size_t k = 0;
  for (auto& [name, t] : *store_) {
    if (values[k].size() != t->size())
      throw UsageError("snapshot tensor " + name + " has the wrong size");
    std::copy(values[k].begin(), values[k].end(), t->values().begin());
    ++k;
  }
}

void ParserModel::save(const std::string& path) const {
  nlohmann::json header;
  header["strategy"] = strategy_.str();
  header["lexicon_hashes"] = {{"lexicon", hex64(lexicon_.hash())}};
  header["dims"] = dims_.to_json();
  header["lexicon"] = lexicon_.to_json();
  save_archive(path, *store_, header);
}

ParserModel ParserModel::load(const std::string& path) {
  LoadedArchive archive = load_archive(path);
  const auto& h = archive.header;
  Lexicon lex = Lexicon::from_json(h.at("lexicon"));
  const std::string expected = h.at("lexicon_hashes").at("lexicon");
  if (hex64(lex.hash()) != expected)
    throw FormatError(path + ": lexicon hash mismatch (expected " + expected +
                      ", found " + hex64(lex.hash()) + ")");
  ParserModel model(SharingStrategy::parse(h.at("strategy").get<std::string>()),
                    std::move(lex), ModelDims::from_json(h.at("dims")), 0);
  if (archive.tensors.size() != model.store_->size())
    throw FormatError(path + ": parameter set does not match the model");
  for (auto& [name, t] : *model.store_) {
    if (!archive.tensors.contains(name))
      throw FormatError(path + ": missing parameter " + name);
    const Tensor& src = archive.tensors.at(name);
    if (!(src.shape() == t->shape()))
      throw FormatError(path + ": parameter " + name + " has shape " +
                        src.shape().str() + ", expected " + t->shape().str());
    std::copy(src.values().begin(), src.values().end(), t->values().begin());
  }
  return model;
}

}  // namespace biparse
