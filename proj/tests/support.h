#ifndef BIPARSE_TESTS_SUPPORT_H_
#define BIPARSE_TESTS_SUPPORT_H_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "biparse/conllu.h"
#include "biparse/lexicon.h"
#include "biparse/model.h"
#include "biparse/synthetic.h"

namespace biparse::testing {

inline ModelDims tiny_dims() {
  ModelDims d;
  d.word_dim = 5;
  d.char_dim = 3;
  d.char_hidden = 3;
  d.word_hidden = 4;
  d.word_layers = 2;
  d.lang_dim = 2;
  d.mlp_hidden = 5;
  return d;
}

// Heads and labels for tokens 1..n; forms are given per token.
inline Sentence make_sentence(const std::string& language,
                              std::vector<std::string> forms,
                              std::vector<int> heads,
                              std::vector<std::string> labels) {
  Sentence s;
  s.language = language;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    Token t;
    t.index = static_cast<int>(i) + 1;
    t.form = forms[i];
    t.head = heads[i];
    t.label = labels[i];
    s.tokens.push_back(t);
  }
  validate_tree(s.heads(), "test sentence");
  return s;
}

inline std::vector<Sentence> synthetic(const std::string& code, std::size_t n,
                                       std::uint64_t seed = 1) {
  return generate_treebank(synthetic_language(code), n, seed);
}

inline Lexicon lexicon_for(const std::vector<std::vector<Sentence>>& corpora,
                           const std::vector<std::string>& languages,
                           SharingStrategy strategy) {
  std::vector<LanguageCorpus> c;
  for (std::size_t i = 0; i < corpora.size(); ++i) c.push_back({languages[i], corpora[i]});
  return build_lexicon(c, strategy);
}

inline std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("biparse_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace biparse::testing

#endif  // BIPARSE_TESTS_SUPPORT_H_
