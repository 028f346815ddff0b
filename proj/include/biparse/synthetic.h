#ifndef BIPARSE_SYNTHETIC_H_
#define BIPARSE_SYNTHETIC_H_

// Synthetic treebanks from a small probabilistic grammar: clauses with
// subjects, objects, adjectives, determiners, adverbs, adpositional phrases
// whose attachment depends on the lexical class of the noun, and relative
// clauses that are sometimes extraposed to the end of the sentence (the
// source of non-projective arcs).
//
// Languages of one family share their stems and lexical classes and differ in
// sound changes, affixes and word order; languages of different families
// share nothing.

#include <cstdint>
#include <string>
#include <vector>

#include "biparse/conllu.h"

namespace biparse {

enum class WordOrder { SVO, SOV, VSO };

struct SyntheticLanguage {
  std::string code;
  std::uint64_t family = 1;   // stems and lexical classes
  std::uint64_t variant = 1;  // sound changes and affixes
  WordOrder order = WordOrder::SVO;
  bool adjective_first = false;
  bool prepositions = true;
  bool object_case = false;
  double relative_clause = 0.15;
  double extraposition = 0.5;
};

// Family a: a1 and a2 (related); family b: b1 and b2 (related).
SyntheticLanguage synthetic_language(const std::string& code);

std::vector<Sentence> generate_treebank(const SyntheticLanguage& lang,
                                        std::size_t sentences,
                                        std::uint64_t seed);

}  // namespace biparse

#endif  // BIPARSE_SYNTHETIC_H_
