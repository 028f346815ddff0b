#include "biparse/lexicon.h"

#include "biparse/common.h"

namespace biparse {

Vocabulary::Vocabulary(bool reserved) : reserved_(reserved) {
  if (reserved_) {
    add(kUnkString);
    add(kPadString);
    freq_[kUnk] = freq_[kPad] = 0;
  }
}

int Vocabulary::add(const std::string& s) {
  auto [it, inserted] = ids_.try_emplace(s, static_cast<int>(strings_.size()));
  if (inserted) {
    strings_.push_back(s);
    freq_.push_back(0);
  }
  ++freq_[it->second];
  return it->second;
}

int Vocabulary::id(const std::string& s) const {
  auto it = ids_.find(s);
  if (it != ids_.end()) return it->second;
  return reserved_ ? kUnk : -1;
}

nlohmann::json Vocabulary::to_json() const {
  return nlohmann::json{{"reserved", reserved_},
                        {"strings", strings_},
                        {"freq", freq_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v(false);
  v.reserved_ = j.at("reserved").get<bool>();
  v.strings_ = j.at("strings").get<std::vector<std::string>>();
  v.freq_ = j.at("freq").get<std::vector<std::size_t>>();
  if (v.freq_.size() != v.strings_.size())
    throw FormatError("vocabulary frequency table size mismatch");
  for (std::size_t i = 0; i < v.strings_.size(); ++i)
    v.ids_[v.strings_[i]] = static_cast<int>(i);
  return v;
}

int Lexicon::language_id(const std::string& code) const {
  for (std::size_t i = 0; i < languages.size(); ++i)
    if (languages[i] == code) return static_cast<int>(i);
  throw ConfigError("language '" + code + "' is not known to this model");
}

nlohmann::json Lexicon::to_json() const {
  nlohmann::json j;
  j["languages"] = languages;
  j["words_shared"] = words_shared;
  j["chars_shared"] = chars_shared;
  j["words"] = nlohmann::json::array();
  for (const auto& v : words) j["words"].push_back(v.to_json());
  j["chars"] = nlohmann::json::array();
  for (const auto& v : chars) j["chars"].push_back(v.to_json());
  j["labels"] = labels.to_json();
  return j;
}

Lexicon Lexicon::from_json(const nlohmann::json& j) {
  Lexicon lex;
  lex.languages = j.at("languages").get<std::vector<std::string>>();
  lex.words_shared = j.at("words_shared").get<bool>();
  lex.chars_shared = j.at("chars_shared").get<bool>();
  for (const auto& v : j.at("words")) lex.words.push_back(Vocabulary::from_json(v));
  for (const auto& v : j.at("chars")) lex.chars.push_back(Vocabulary::from_json(v));
  lex.labels = Vocabulary::from_json(j.at("labels"));
  return lex;
}

std::uint64_t Lexicon::hash() const { return fnv1a(to_json().dump()); }

Lexicon build_lexicon(std::span<const LanguageCorpus> corpora,
                      SharingStrategy strategy) {
  if (corpora.empty()) throw UsageError("build_lexicon: no languages");
  Lexicon lex;
  lex.words_shared = strategy.words != Mode::Separate;
  lex.chars_shared = strategy.chars != Mode::Separate;
  for (const auto& c : corpora) {
    for (const auto& known : lex.languages)
      if (known == c.language)
        throw ConfigError("language '" + c.language + "' listed twice");
    lex.languages.push_back(c.language);
  }
  const std::size_t n_lang = corpora.size();
  lex.words.assign(lex.words_shared ? 1 : n_lang, Vocabulary(true));
  lex.chars.assign(lex.chars_shared ? 1 : n_lang, Vocabulary(true));
  for (std::size_t l = 0; l < n_lang; ++l) {
    Vocabulary& words = lex.words[lex.words_shared ? 0 : l];
    Vocabulary& chars = lex.chars[lex.chars_shared ? 0 : l];
    for (const Sentence& s : corpora[l].sentences) {
      for (const Token& t : s.tokens) {
        words.add(t.form);
        for (const std::string& ch : utf8_characters(t.form)) chars.add(ch);
        lex.labels.add(t.label);
      }
    }
  }
  return lex;
}

}  // namespace biparse
