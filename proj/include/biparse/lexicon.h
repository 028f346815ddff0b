#ifndef BIPARSE_LEXICON_H_
#define BIPARSE_LEXICON_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "biparse/conllu.h"
#include "biparse/sharing.h"

namespace biparse {

// String <-> dense id map with frequencies. Word and character vocabularies
// reserve id 0 for UNK and id 1 for PAD; the label vocabulary reserves none.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kPad = 1;
  static constexpr const char* kUnkString = "<unk>";
  static constexpr const char* kPadString = "<pad>";

  explicit Vocabulary(bool reserved = true);

  int add(const std::string& s);
  // Unknown strings map to kUnk, or -1 for a vocabulary without reserved ids.
  int id(const std::string& s) const;
  bool contains(const std::string& s) const { return ids_.count(s) > 0; }
  const std::string& str(int id) const { return strings_.at(id); }
  std::size_t size() const { return strings_.size(); }
  std::size_t frequency(int id) const { return freq_.at(id); }
  bool reserved() const { return reserved_; }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  bool reserved_;
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> strings_;
  std::vector<std::size_t> freq_;
};

struct LanguageCorpus {
  std::string language;
  std::span<const Sentence> sentences;
};

class Lexicon {
 public:
  std::vector<std::string> languages;
  bool words_shared = false;
  bool chars_shared = false;
  // One vocabulary when shared, otherwise one per language (indexed by
  // language id).
  std::vector<Vocabulary> words;
  std::vector<Vocabulary> chars;
  Vocabulary labels{false};

  int language_id(const std::string& code) const;
  const Vocabulary& word_vocab(int lang) const {
    return words.at(words_shared ? 0 : lang);
  }
  const Vocabulary& char_vocab(int lang) const {
    return chars.at(chars_shared ? 0 : lang);
  }

  std::uint64_t hash() const;
  nlohmann::json to_json() const;
  static Lexicon from_json(const nlohmann::json& j);
};

// Word and character maps are unions when the strategy shares the
// corresponding component (Hard or Soft) and per-language otherwise; the
// label map is always the union.
Lexicon build_lexicon(std::span<const LanguageCorpus> corpora,
                      SharingStrategy strategy);

}  // namespace biparse

#endif  // BIPARSE_LEXICON_H_
