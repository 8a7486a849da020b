#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "afcsim/error.hpp"
#include "afcsim/io/hash.hpp"

namespace afcsim::io {

struct WrittenFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

/// Writes `content` to dir/name, creating directories as needed.
inline WrittenFile write_output(const std::filesystem::path& dir, const std::string& name, std::string_view content) {
  std::error_code ec;
  const auto full = dir / name;
  std::filesystem::create_directories(full.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory '" + full.parent_path().string() + "': " + ec.message());
  std::ofstream out(full, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + full.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) fail(ErrorCode::IoError, "write to '" + full.string() + "' failed");
  return {name, sha256_hex(content), content.size()};
}

}  // namespace afcsim::io
