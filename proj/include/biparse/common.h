#ifndef BIPARSE_COMMON_H_
#define BIPARSE_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace biparse {

#ifdef BIPARSE_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

// Error hierarchy. The CLI maps UsageError/ConfigError to exit code 2 and
// everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class TransitionError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

// 64-bit FNV-1a, used for lexicon and input-file content hashes.
inline std::uint64_t fnv1a(std::string_view data,
                           std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

}  // namespace biparse

#endif  // BIPARSE_COMMON_H_
