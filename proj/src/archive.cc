#include "biparse/archive.h"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace biparse {

namespace {

constexpr char kMagic[8] = {'B', 'I', 'P', 'A', 'R', 'S', 'E', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError(path + ": truncated archive");
  return v;
}

}  // namespace

const char* native_dtype() { return sizeof(real) == 8 ? "f64" : "f32"; }

void save_archive(const std::string& path, const ParameterStore& store,
                  nlohmann::json header) {
  header["format_version"] = kArchiveFormatVersion;
  header["dtype"] = native_dtype();
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write archive " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint64_t>(out, store.size());
  for (const auto& [name, t] : store) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint64_t>(out, t->shape().rows);
    put<std::uint64_t>(out, t->shape().cols);
    auto v = t->values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(real)));
  }
  if (!out) throw Error("failed writing archive " + path);
}

LoadedArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open archive " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError(path + ": not a biparse archive");
  LoadedArchive result;
  const auto header_len = get<std::uint64_t>(in, path);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw FormatError(path + ": truncated header");
  result.header = nlohmann::json::parse(text);
  if (result.header.value("format_version", 0) != kArchiveFormatVersion)
    throw FormatError(path + ": unsupported archive version");
  const std::string dtype = result.header.value("dtype", "");
  if (dtype != native_dtype())
    throw FormatError(path + ": archive dtype " + dtype +
                      " does not match this build (" + native_dtype() + ")");
  const auto count = get<std::uint64_t>(in, path);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    Tensor& t = result.tensors.add(name, Shape{rows, cols});
    auto v = t.values();
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(real)));
    if (!in) throw FormatError(path + ": truncated tensor " + name);
  }
  return result;
}

}  // namespace biparse
