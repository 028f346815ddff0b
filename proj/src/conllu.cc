#include "biparse/conllu.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "biparse/common.h"

namespace biparse {

std::vector<int> Sentence::heads() const {
  std::vector<int> h(tokens.size() + 1, -1);
  for (const Token& t : tokens) h[t.index] = t.head;
  return h;
}

std::string Sentence::id() const {
  for (const std::string& c : comments) {
    auto pos = c.find("sent_id");
    if (pos == std::string::npos) continue;
    auto eq = c.find('=', pos);
    if (eq == std::string::npos) continue;
    std::string v = c.substr(eq + 1);
    v.erase(0, v.find_first_not_of(' '));
    return v;
  }
  return {};
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string where(std::size_t line_no, std::size_t sentence_no,
                  const Sentence& s) {
  std::string w = "line " + std::to_string(line_no) + ", sentence " +
                  std::to_string(sentence_no);
  const std::string id = s.id();
  if (!id.empty()) w += " (" + id + ")";
  return w;
}

}  // namespace

void validate_tree(const std::vector<int>& heads, const std::string& where) {
  const int n = static_cast<int>(heads.size()) - 1;
  // 0 = unvisited, 1 = on current path, 2 = reaches root
  std::vector<int> state(heads.size(), 0);
  state[0] = 2;
  for (int i = 1; i <= n; ++i) {
    if (heads[i] < 0 || heads[i] > n)
      throw FormatError(where + ": head of token " + std::to_string(i) +
                        " out of range");
    if (heads[i] == i)
      throw FormatError(where + ": token " + std::to_string(i) +
                        " is its own head");
  }
  for (int i = 1; i <= n; ++i) {
    std::vector<int> path;
    int k = i;
    while (state[k] == 0) {
      state[k] = 1;
      path.push_back(k);
      k = heads[k];
    }
    if (state[k] == 1)
      throw FormatError(where + ": head cycle through token " +
                        std::to_string(k));
    for (int p : path) state[p] = 2;
  }
}

bool is_projective(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size()) - 1;
  for (int d = 1; d <= n; ++d) {
    const int h = heads[d];
    if (h <= 0) continue;
    const int lo = std::min(h, d), hi = std::max(h, d);
    for (int k = lo + 1; k < hi; ++k) {
      int a = k;
      while (a != 0 && a != h) a = heads[a];
      if (a != h) return false;
    }
  }
  return true;
}

std::vector<Sentence> parse_conllu(std::istream& in,
                                   const std::string& language,
                                   ReadOptions options) {
  std::vector<Sentence> result;
  Sentence current;
  current.language = language;
  std::size_t line_no = 0;
  std::size_t block_start = 0;

  auto finish = [&]() {
    if (current.layout.empty()) return;
    const std::size_t sentence_no = result.size() + 1;
    if (current.tokens.empty())
      throw FormatError(where(block_start, sentence_no, current) +
                        ": sentence has no syntactic words");
    bool annotated = true;
    for (std::size_t i = 0; i < current.tokens.size(); ++i) {
      const Token& t = current.tokens[i];
      if (t.index != static_cast<int>(i) + 1)
        throw FormatError(where(block_start, sentence_no, current) +
                          ": token ids are not contiguous from 1");
      if (t.head < 0) annotated = false;
    }
    const int n = static_cast<int>(current.tokens.size());
    for (const Token& t : current.tokens) {
      if (t.head > n)
        throw FormatError(where(block_start, sentence_no, current) +
                          ": head " + std::to_string(t.head) +
                          " of token " + std::to_string(t.index) +
                          " out of range");
    }
    if (annotated)
      validate_tree(current.heads(), where(block_start, sentence_no, current));
    else if (options.require_tree)
      throw FormatError(where(block_start, sentence_no, current) +
                        ": missing head annotation");
    result.push_back(std::move(current));
    current = Sentence{};
    current.language = language;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    if (current.layout.empty()) block_start = line_no;
    if (line[0] == '#') {
      if (!current.tokens.empty())
        throw FormatError("line " + std::to_string(line_no) +
                          ": comment inside a sentence");
      current.comments.push_back(line);
      current.layout.push_back({-1, line});
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw FormatError("line " + std::to_string(line_no) + ": expected 10 "
                        "tab-separated columns, found " +
                        std::to_string(cols.size()));
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      current.layout.push_back({-1, line});
      continue;
    }
    Token t;
    if (!parse_int(id, t.index) || t.index < 1)
      throw FormatError("line " + std::to_string(line_no) +
                        ": invalid token id '" + id + "'");
    t.form = cols[1];
    if (cols[6] == "_" && !options.require_tree) {
      t.head = -1;
    } else if (!parse_int(cols[6], t.head) || t.head < 0) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": non-integer head '" + cols[6] + "'");
    }
    t.label = cols[7];
    t.columns = std::move(cols);
    current.layout.push_back({static_cast<int>(current.tokens.size()), {}});
    current.tokens.push_back(std::move(t));
  }
  finish();
  return result;
}

std::vector<Sentence> parse_conllu(std::string_view text,
                                   const std::string& language,
                                   ReadOptions options) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in, language, options);
}

std::vector<Sentence> read_conllu_file(const std::string& path,
                                       const std::string& language,
                                       ReadOptions options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open treebank " + path);
  try {
    return parse_conllu(in, language, options);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_conllu(std::ostream& out, std::span<const Sentence> sentences) {
  for (const Sentence& s : sentences) {
    for (const Sentence::Line& line : s.layout) {
      if (line.token < 0) {
        out << line.raw << '\n';
        continue;
      }
      const Token& t = s.tokens[line.token];
      std::vector<std::string> cols = t.columns;
      if (cols.size() != 10) {
        cols.assign(10, "_");
        cols[0] = std::to_string(t.index);
        cols[1] = t.form;
      }
      cols[6] = t.head < 0 ? "_" : std::to_string(t.head);
      cols[7] = t.label.empty() ? "_" : t.label;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << '\t';
        out << cols[c];
      }
      out << '\n';
    }
    out << '\n';
  }
}

std::string to_conllu(std::span<const Sentence> sentences) {
  std::ostringstream out;
  write_conllu(out, sentences);
  return out.str();
}

void write_conllu_file(const std::string& path,
                       std::span<const Sentence> sentences) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_conllu(out, sentences);
}

std::vector<Sentence> sample_training(std::span<const Sentence> sentences,
                                      std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("sample size must be at least 1");
  if (n >= sentences.size())
    return std::vector<Sentence>(sentences.begin(), sentences.end());
  std::vector<std::size_t> all(sentences.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::mt19937_64 rng(seed);
  // selection sampling over a forward range keeps the original order
  std::sample(all.begin(), all.end(), std::back_inserter(picked), n, rng);
  std::vector<Sentence> out;
  out.reserve(n);
  for (std::size_t i : picked) out.push_back(sentences[i]);
  return out;
}

TreebankStats treebank_stats(std::span<const Sentence> sentences) {
  TreebankStats s;
  s.sentences = sentences.size();
  for (const Sentence& x : sentences) s.tokens += x.size();
  return s;
}

std::vector<std::string> utf8_characters(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    if (c < 0x80) len = 1;
    else if ((c >> 5) == 0x6) len = 2;
    else if ((c >> 4) == 0xE) len = 3;
    else if ((c >> 3) == 0x1E) len = 4;
    else throw FormatError("invalid UTF-8 lead byte in '" + std::string(text) + "'");
    if (i + len > text.size())
      throw FormatError("truncated UTF-8 sequence in '" + std::string(text) + "'");
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) >> 6) != 0x2)
        throw FormatError("invalid UTF-8 continuation in '" + std::string(text) + "'");
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace biparse
