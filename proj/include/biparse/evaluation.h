#ifndef BIPARSE_EVALUATION_H_
#define BIPARSE_EVALUATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biparse/conllu.h"
#include "biparse/sharing.h"

namespace biparse {

struct AttachmentScores {
  double uas = 0;
  double las = 0;
};

// Per-sentence counts of one system on one gold treebank. Aggregates are
// micro-averages over tokens; punctuation counts like any other token.
struct ScoredRun {
  std::string language;
  std::string system;
  std::vector<std::int64_t> correct_heads;
  std::vector<std::int64_t> correct_labeled;
  std::vector<std::int64_t> tokens;

  std::int64_t total_tokens() const;
  std::int64_t total_correct_heads() const;
  std::int64_t total_correct_labeled() const;
  double uas() const;
  double las() const;
};

// Throws EvaluationError naming the first misaligned sentence.
ScoredRun score_run(std::span<const Sentence> gold,
                    std::span<const Sentence> predicted,
                    const std::string& language = {},
                    const std::string& system = {});
AttachmentScores attachment_scores(std::span<const Sentence> gold,
                                   std::span<const Sentence> predicted);

// Two-sided paired randomization test on per-sentence labeled counts:
// p = (1 + #{replicates with |diff| >= observed}) / (1 + shuffles).
double randomization_test(const ScoredRun& a, const ScoredRun& b,
                          std::size_t shuffles = 10000, std::uint64_t seed = 1);

// Dev LAS of the nine (W, C) cells with the MLP hard-shared.
using SelectionGrid = std::map<std::pair<Mode, Mode>, double>;

// Argmax over (W, C); ties go to less sharing (Separate, then Soft, then
// Hard), W compared before C. Throws ConfigError on a missing cell.
std::pair<Mode, Mode> select_strategy(const SelectionGrid& dev);

// Rounds half up to one decimal ("79.05" -> "79.1") through integer
// hundredths so that binary representation error cannot flip a tie.
std::string format_score(double value);

struct GridRow {
  std::string name;  // "Mono", "Language-best", or empty for strategies
  std::optional<SharingStrategy> strategy;
  std::vector<std::optional<double>> las;  // per language

  // Mean over languages; empty when any cell is missing.
  std::optional<double> average() const;
};

struct GridReport {
  std::vector<std::string> languages;
  GridRow mono;
  GridRow language_best;
  std::vector<GridRow> strategies;  // ranked by average, best first

  const GridRow& best() const { return strategies.front(); }
  const GridRow& worst() const;  // last row with a complete average
  std::string text(bool unicode = true) const;
  std::string csv() const;
};

// Ranks strategy rows by average LAS (descending; ties keep the canonical
// strategy order; rows with missing cells last) and derives Language-best as
// the per-language column maximum. Throws ConfigError on width mismatches.
GridReport grid_report(std::vector<std::string> languages,
                       std::vector<GridRow> strategies, GridRow mono);

// Reads the layout written by GridReport::csv (derived rows are recomputed):
//   C,W,S,<lang>...,average   with a "mono,,," row.
GridReport parse_grid_csv(const std::string& text);
GridReport load_grid_csv(const std::string& path);

// One row of the proposed-model test table.
struct OursRow {
  std::string language;
  Mode words = Mode::Separate;
  Mode chars = Mode::Separate;
  double ours = 0;
  double mono = 0;
  double p_value = 1;
  double delta() const { return ours - mono; }
};

std::string ours_text(std::span<const OursRow> rows, bool unicode = true);
std::string ours_csv(std::span<const OursRow> rows);

}  // namespace biparse

#endif  // BIPARSE_EVALUATION_H_
