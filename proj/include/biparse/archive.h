#ifndef BIPARSE_ARCHIVE_H_
#define BIPARSE_ARCHIVE_H_

// Parameter checkpoint archive.
//
// Layout (little-endian):
//   "BIPARSE1"                          8-byte magic
//   u64 header length, JSON header      format_version, dtype, strategy,
//                                       lexicon_hashes, free-form metadata
//   u64 tensor count
//   per tensor: u32 name length, name, u64 rows, u64 cols, raw values
// Tensors appear in name order; values are row-major in the header's dtype.

#include <string>

#include "json.hpp"

#include "biparse/autodiff.h"

namespace biparse {

inline constexpr int kArchiveFormatVersion = 1;

// Native dtype tag of this build ("f64" or "f32").
const char* native_dtype();

// Fills format_version and dtype in the header before writing.
void save_archive(const std::string& path, const ParameterStore& store,
                  nlohmann::json header);

struct LoadedArchive {
  nlohmann::json header;
  ParameterStore tensors;
};

LoadedArchive load_archive(const std::string& path);

}  // namespace biparse

#endif  // BIPARSE_ARCHIVE_H_
