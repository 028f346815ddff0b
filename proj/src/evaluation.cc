#include "biparse/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "biparse/common.h"
#include "biparse/kernels.h"

namespace biparse {

namespace {

std::int64_t total(const std::vector<std::int64_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::int64_t{0});
}

double percent(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::int64_t ScoredRun::total_tokens() const { return total(tokens); }
std::int64_t ScoredRun::total_correct_heads() const { return total(correct_heads); }
std::int64_t ScoredRun::total_correct_labeled() const { return total(correct_labeled); }
double ScoredRun::uas() const { return percent(total_correct_heads(), total_tokens()); }
double ScoredRun::las() const { return percent(total_correct_labeled(), total_tokens()); }

ScoredRun score_run(std::span<const Sentence> gold,
                    std::span<const Sentence> predicted,
                    const std::string& language, const std::string& system) {
  if (gold.size() != predicted.size())
    throw EvaluationError("gold has " + std::to_string(gold.size()) +
                          " sentences but the prediction has " +
                          std::to_string(predicted.size()));
  ScoredRun run;
  run.language = language;
  run.system = system;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Sentence& g = gold[i];
    const Sentence& p = predicted[i];
    if (g.size() != p.size()) {
      std::string name = "sentence " + std::to_string(i + 1);
      if (!g.id().empty()) name += " (" + g.id() + ")";
      throw EvaluationError(name + ": gold has " + std::to_string(g.size()) +
                            " tokens, prediction has " + std::to_string(p.size()));
    }
    std::int64_t heads = 0, labeled = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g.tokens[k].head != p.tokens[k].head) continue;
      ++heads;
      if (g.tokens[k].label == p.tokens[k].label) ++labeled;
    }
    run.correct_heads.push_back(heads);
    run.correct_labeled.push_back(labeled);
    run.tokens.push_back(static_cast<std::int64_t>(g.size()));
  }
  return run;
}

AttachmentScores attachment_scores(std::span<const Sentence> gold,
                                   std::span<const Sentence> predicted) {
  ScoredRun run = score_run(gold, predicted);
  return {run.uas(), run.las()};
}

double randomization_test(const ScoredRun& a, const ScoredRun& b,
                          std::size_t shuffles, std::uint64_t seed) {
  if (shuffles == 0) throw UsageError("randomization test needs at least one shuffle");
  if (a.tokens != b.tokens)
    throw EvaluationError("runs " + a.system + " and " + b.system +
                          " are not aligned on the same sentences");
  // Token totals are shared, so |LAS_A - LAS_B| is a fixed multiple of
  // |sum of per-sentence differences|; the test works on the integers.
  std::vector<std::int64_t> diffs(a.tokens.size());
  for (std::size_t i = 0; i < diffs.size(); ++i)
    diffs[i] = a.correct_labeled[i] - b.correct_labeled[i];
  const std::int64_t observed = std::llabs(total(diffs));
  const std::size_t extreme =
      kernels::omp::count_extreme_replicates(diffs, observed, shuffles, seed);
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + shuffles);
}

namespace {

int canonical_index(const GridRow& row) {
  if (!row.strategy) return 27;
  const SharingStrategy& s = *row.strategy;
  return 9 * static_cast<int>(s.chars) + 3 * static_cast<int>(s.words) +
         static_cast<int>(s.state);
}

int sharing_rank(Mode m) {
  switch (m) {
    case Mode::Separate: return 0;
    case Mode::Soft: return 1;
    case Mode::Hard: return 2;
  }
  return 3;
}

}  // namespace

std::pair<Mode, Mode> select_strategy(const SelectionGrid& dev) {
  std::pair<Mode, Mode> best{};
  bool have = false;
  double best_las = 0;
  for (Mode w : kModes)
    for (Mode c : kModes) {
      auto it = dev.find({w, c});
      if (it == dev.end())
        throw ConfigError("selection grid is missing cell W=" +
                          std::string(mode_ascii(w)) + ",C=" +
                          std::string(mode_ascii(c)));
      const double las = it->second;
      bool better = !have || las > best_las;
      if (have && las == best_las) {
        const auto key = std::make_pair(sharing_rank(w), sharing_rank(c));
        const auto cur = std::make_pair(sharing_rank(best.first), sharing_rank(best.second));
        better = key < cur;
      }
      if (better) {
        best = {w, c};
        best_las = las;
        have = true;
      }
    }
  return best;
}

std::string format_score(double value) {
  const long long hundredths = std::llround(std::fabs(value) * 100.0);
  const long long tenths = (hundredths + 5) / 10;
  std::string s = std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
  if (value < 0 && tenths != 0) s = "-" + s;
  return s;
}

std::optional<double> GridRow::average() const {
  if (las.empty()) return std::nullopt;
  double sum = 0;
  for (const auto& v : las) {
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum / static_cast<double>(las.size());
}

const GridRow& GridReport::worst() const {
  for (auto it = strategies.rbegin(); it != strategies.rend(); ++it)
    if (it->average()) return *it;
  return strategies.back();
}

GridReport grid_report(std::vector<std::string> languages,
                       std::vector<GridRow> strategies, GridRow mono) {
  if (strategies.empty()) throw ConfigError("grid report needs at least one strategy");
  const std::size_t width = languages.size();
  auto check = [&](const GridRow& row, const std::string& what) {
    if (row.las.size() != width)
      throw ConfigError(what + " has " + std::to_string(row.las.size()) +
                        " scores for " + std::to_string(width) + " languages");
  };
  check(mono, "Mono row");
  for (const GridRow& r : strategies)
    check(r, r.strategy ? r.strategy->str() : r.name);

  std::stable_sort(strategies.begin(), strategies.end(),
                   [](const GridRow& a, const GridRow& b) {
                     auto x = a.average(), y = b.average();
                     if (x && y && *x != *y) return *x > *y;
                     if (x.has_value() != y.has_value()) return x.has_value();
                     return canonical_index(a) < canonical_index(b);
                   });
  GridReport report;
  report.languages = std::move(languages);
  report.mono = std::move(mono);
  report.mono.name = "Mono";
  report.language_best.name = "Language-best";
  report.language_best.las.assign(width, std::nullopt);
  for (std::size_t k = 0; k < width; ++k)
    for (const GridRow& r : strategies)
      if (r.las[k] && (!report.language_best.las[k] ||
                       *r.las[k] > *report.language_best.las[k]))
        report.language_best.las[k] = r.las[k];
  report.strategies = std::move(strategies);
  return report;
}

namespace {

std::string cell(const std::optional<double>& v) {
  return v ? format_score(*v) : std::string("n/a");
}

std::string mode_text(Mode m, bool unicode) {
  return std::string(unicode ? mode_symbol(m) : mode_ascii(m));
}

// Display width, counting UTF-8 code points.
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : std::string(width - w, ' ') + s;
}

}  // namespace

std::string GridReport::text(bool unicode) const {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Model", "C", "W", "S"};
  header.insert(header.end(), languages.begin(), languages.end());
  header.push_back("Avg");
  rows.push_back(header);
  auto add = [&](const GridRow& r) {
    std::vector<std::string> line;
    if (r.strategy) {
      line = {r.name, mode_text(r.strategy->chars, unicode),
              mode_text(r.strategy->words, unicode),
              mode_text(r.strategy->state, unicode)};
    } else {
      line = {r.name, "", "", ""};
    }
    for (const auto& v : r.las) line.push_back(cell(v));
    line.push_back(cell(r.average()));
    rows.push_back(line);
  };
  add(mono);
  add(language_best);
  for (const GridRow& r : strategies) add(r);

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c)
      widths[c] = std::max(widths[c], display_width(r[c]));
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string line = r[0] + std::string(widths[0] - display_width(r[0]), ' ');
    for (std::size_t c = 1; c < r.size(); ++c) line += "  " + pad(r[c], widths[c]);
    out << line << '\n';
    if (i == 0 || i == 2) out << std::string(display_width(line), '-') << '\n';
  }
  return out.str();
}

std::string GridReport::csv() const {
  std::ostringstream out;
  out << "C,W,S";
  for (const auto& l : languages) out << ',' << l;
  out << ",average\n";
  auto row = [&](const std::string& c, const std::string& w,
                 const std::string& s, const GridRow& r) {
    out << c << ',' << w << ',' << s;
    for (const auto& v : r.las) out << ',' << (v ? format_score(*v) : "");
    auto avg = r.average();
    out << ',' << (avg ? format_score(*avg) : "") << '\n';
  };
  row("mono", "", "", mono);
  row("language-best", "", "", language_best);
  for (const GridRow& r : strategies) {
    const SharingStrategy& st = *r.strategy;
    row(std::string(mode_ascii(st.chars)), std::string(mode_ascii(st.words)),
        std::string(mode_ascii(st.state)), r);
  }
  return out.str();
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

GridReport parse_grid_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty grid CSV");
  auto header = split_commas(line);
  if (header.size() < 5 || header[0] != "C" || header[1] != "W" || header[2] != "S")
    throw FormatError("grid CSV header must start with C,W,S");
  std::vector<std::string> languages(header.begin() + 3, header.end() - 1);
  GridRow mono;
  bool have_mono = false;
  std::vector<GridRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_commas(line);
    if (cols.size() != header.size())
      throw FormatError("grid CSV line " + std::to_string(line_no) +
                        ": expected " + std::to_string(header.size()) + " fields");
    GridRow row;
    for (std::size_t k = 0; k < languages.size(); ++k) {
      const std::string& v = cols[3 + k];
      if (v.empty() || v == "n/a") {
        row.las.push_back(std::nullopt);
        continue;
      }
      char* end = nullptr;
      const double d = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size())
        throw FormatError("grid CSV line " + std::to_string(line_no) +
                          ": bad score '" + v + "'");
      row.las.push_back(d);
    }
    if (cols[0] == "mono") {
      mono = std::move(row);
      have_mono = true;
    } else if (cols[0] == "language-best") {
      continue;
    } else {
      SharingStrategy st;
      st.chars = parse_mode(cols[0]);
      st.words = parse_mode(cols[1]);
      st.state = parse_mode(cols[2]);
      row.strategy = st;
      rows.push_back(std::move(row));
    }
  }
  if (!have_mono) throw FormatError("grid CSV has no mono row");
  return grid_report(std::move(languages), std::move(rows), std::move(mono));
}

GridReport load_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid_csv(ss.str());
}

std::string ours_text(std::span<const OursRow> rows, bool unicode) {
  std::ostringstream out;
  out << std::left << std::setw(6) << "" << std::right << std::setw(4) << "W"
      << std::setw(4) << "C" << std::setw(8) << "Ours" << std::setw(8) << "Mono"
      << pad(unicode ? "\u03b4" : "delta", 7) << std::setw(9) << "p" << '\n';
  double ours = 0, mono = 0;
  for (const OursRow& r : rows) {
    out << std::left << std::setw(6) << r.language << std::right
        << pad(mode_text(r.words, unicode), 4) << pad(mode_text(r.chars, unicode), 4)
        << std::setw(8) << format_score(r.ours) << std::setw(8)
        << format_score(r.mono) << std::setw(7) << format_score(r.delta());
    std::ostringstream p;
    p << std::setprecision(4) << r.p_value;
    out << std::setw(9) << p.str() << '\n';
    ours += r.ours;
    mono += r.mono;
  }
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    out << std::left << std::setw(6) << "av." << std::right << std::setw(8)
        << "" << std::setw(8) << format_score(ours / n) << std::setw(8)
        << format_score(mono / n) << std::setw(7)
        << format_score(ours / n - mono / n) << '\n';
  }
  return out.str();
}

std::string ours_csv(std::span<const OursRow> rows) {
  std::ostringstream out;
  out << "language,W,C,ours,mono,delta,p\n";
  for (const OursRow& r : rows) {
    std::ostringstream p;
    p << std::setprecision(6) << r.p_value;
    out << r.language << ',' << mode_ascii(r.words) << ',' << mode_ascii(r.chars)
        << ',' << format_score(r.ours) << ',' << format_score(r.mono) << ','
        << format_score(r.delta()) << ',' << p.str() << '\n';
  }
  return out.str();
}

}  // namespace biparse
