#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace histkit::fs_util {

// Writes through a sibling temp file and renames it over `path`, so readers
// never observe a partially written file.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

std::string read_file(const std::filesystem::path& path);

// Filesystem-safe encoding of an arbitrary id: [A-Za-z0-9_-] pass through,
// every other byte becomes %XX.
std::string encode_filename(std::string_view id);

}  // namespace histkit::fs_util
