#pragma once

#include <fstream>
#include <string>

#include "midword/error.hpp"

namespace midword::io {

template <typename F>
void write_file(const std::filesystem::path& path, F&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot open '" + path.string() + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw Error(Errc::kIo, "failed writing '" + path.string() + "'");
}

template <typename F>
auto read_file(const std::filesystem::path& path, F&& reader) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open '" + path.string() + "'");
  return reader(in);
}

}  // namespace midword::io
