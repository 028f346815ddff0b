#ifndef BIPARSE_CONLLU_H_
#define BIPARSE_CONLLU_H_

// CoNLL-U treebank reading and writing.
//
// Only ID, FORM, HEAD and DEPREL are interpreted. Every other column, comment
// lines, multiword-token ranges ("3-4") and empty nodes ("5.1") are kept
// verbatim so that a read/write cycle reproduces the input.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biparse {

struct Token {
  int index = 0;
  std::string form;
  int head = -1;  // 0 = root, -1 = unannotated
  std::string label;
  std::vector<std::string> columns;  // all ten raw columns
};

struct Sentence {
  // A line of the original block: a syntactic word (token >= 0) or a raw
  // comment / range / empty-node line.
  struct Line {
    int token = -1;
    std::string raw;
  };

  std::vector<Token> tokens;
  std::string language;
  std::vector<std::string> comments;
  std::vector<Line> layout;

  std::size_t size() const { return tokens.size(); }
  // heads()[i] for i in 1..n; heads()[0] is unused (-1).
  std::vector<int> heads() const;
  // sent_id comment if present, otherwise empty.
  std::string id() const;
};

struct ReadOptions {
  // When false, "_" heads are accepted (unannotated input for parsing) and
  // the tree check is skipped for such sentences.
  bool require_tree = true;
};

std::vector<Sentence> parse_conllu(std::istream& in,
                                   const std::string& language,
                                   ReadOptions options = {});
std::vector<Sentence> parse_conllu(std::string_view text,
                                   const std::string& language,
                                   ReadOptions options = {});
std::vector<Sentence> read_conllu_file(const std::string& path,
                                       const std::string& language,
                                       ReadOptions options = {});

void write_conllu(std::ostream& out, std::span<const Sentence> sentences);
std::string to_conllu(std::span<const Sentence> sentences);
void write_conllu_file(const std::string& path,
                       std::span<const Sentence> sentences);

// Throws FormatError unless heads form a single tree rooted at node 0.
void validate_tree(const std::vector<int>& heads, const std::string& where);

bool is_projective(const std::vector<int>& heads);

// Uniform sample without replacement of min(n, |sentences|) sentences,
// reproducible from the seed; selected sentences keep their relative order.
std::vector<Sentence> sample_training(std::span<const Sentence> sentences,
                                      std::size_t n, std::uint64_t seed);

struct TreebankStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
};

TreebankStats treebank_stats(std::span<const Sentence> sentences);

// Splits UTF-8 text into one string per Unicode scalar value.
std::vector<std::string> utf8_characters(std::string_view text);

}  // namespace biparse

#endif  // BIPARSE_CONLLU_H_
