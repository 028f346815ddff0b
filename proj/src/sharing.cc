#include "biparse/sharing.h"

#include <algorithm>
#include <cctype>

#include "biparse/common.h"

namespace biparse {

std::string_view mode_ascii(Mode m) {
  switch (m) {
    case Mode::Separate: return "x";
    case Mode::Hard: return "h";
    case Mode::Soft: return "id";
  }
  return "?";
}

std::string_view mode_symbol(Mode m) {
  switch (m) {
    case Mode::Separate: return "✗";
    case Mode::Hard: return "✓";
    case Mode::Soft: return "ID";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  std::string t(text);
  if (t == "✗") return Mode::Separate;
  if (t == "✓") return Mode::Hard;
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (t == "x" || t == "separate" || t == "none") return Mode::Separate;
  if (t == "h" || t == "hard") return Mode::Hard;
  if (t == "id" || t == "soft") return Mode::Soft;
  throw ConfigError("unknown sharing mode '" + std::string(text) + "'");
}

std::string SharingStrategy::str() const {
  std::string s = "C=";
  s += mode_ascii(chars);
  s += ",W=";
  s += mode_ascii(words);
  s += ",S=";
  s += mode_ascii(state);
  return s;
}

SharingStrategy SharingStrategy::parse(std::string_view text) {
  SharingStrategy s;
  bool seen[3] = {false, false, false};
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(start, comma - start);
    auto eq = item.find('=');
    if (eq != 1)
      throw ConfigError("malformed sharing strategy '" + std::string(text) +
                        "' (expected C=<m>,W=<m>,S=<m>)");
    const char key = static_cast<char>(std::toupper(item[0]));
    const Mode m = parse_mode(item.substr(2));
    int slot = key == 'C' ? 0 : key == 'W' ? 1 : key == 'S' ? 2 : -1;
    if (slot < 0 || seen[slot])
      throw ConfigError("malformed sharing strategy '" + std::string(text) + "'");
    seen[slot] = true;
    (slot == 0 ? s.chars : slot == 1 ? s.words : s.state) = m;
    start = comma + 1;
  }
  if (!(seen[0] && seen[1] && seen[2]))
    throw ConfigError("sharing strategy '" + std::string(text) +
                      "' must name C, W and S");
  return s;
}

std::array<SharingStrategy, 27> all_strategies() {
  std::array<SharingStrategy, 27> out;
  std::size_t k = 0;
  for (Mode c : kModes)
    for (Mode w : kModes)
      for (Mode s : kModes) out[k++] = SharingStrategy{c, w, s};
  return out;
}

}  // namespace biparse
