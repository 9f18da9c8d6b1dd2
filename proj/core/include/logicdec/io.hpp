#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace logicdec {

/// Reads a text file line by line, decompressing gzip input transparently.
/// Trailing carriage returns are stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace logicdec
