#ifndef BIPARSE_SHARING_H_
#define BIPARSE_SHARING_H_

#include <array>
#include <string>
#include <string_view>

namespace biparse {

// How one parameter set is used by the two languages.
enum class Mode {
  Separate,  // one copy per language
  Hard,      // a single copy for both
  Soft,      // a single copy plus a language embedding at its input
};

inline constexpr std::array<Mode, 3> kModes = {Mode::Separate, Mode::Hard,
                                                Mode::Soft};

// ASCII notation: "x", "h", "id"; display notation: "✗", "✓", "ID".
std::string_view mode_ascii(Mode m);
std::string_view mode_symbol(Mode m);
// Accepts x/h/id, the display symbols, and the long names.
Mode parse_mode(std::string_view text);

// Sharing of the character network (C), the word network (W) and the
// transition classifier (S).
struct SharingStrategy {
  Mode chars = Mode::Separate;
  Mode words = Mode::Separate;
  Mode state = Mode::Separate;

  bool operator==(const SharingStrategy&) const = default;

  // "C=x,W=h,S=id"
  std::string str() const;
  static SharingStrategy parse(std::string_view text);
};

// All 27 strategies, C varying slowest.
std::array<SharingStrategy, 27> all_strategies();

}  // namespace biparse

#endif  // BIPARSE_SHARING_H_
