#include "logicdec/io.hpp"

#include <zlib.h>

#include <array>
#include <memory>

#include "logicdec/error.hpp"

namespace logicdec {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> file(gzopen(path.c_str(), "rb"), &gzclose);
  if (!file) throw Error("cannot open " + path.string());

  std::vector<std::string> lines;
  std::string current;
  std::array<char, 1 << 16> buf{};
  for (;;) {
    const int n = gzread(file.get(), buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      int code = 0;
      const char* msg = gzerror(file.get(), &code);
      throw Error("read failure in " + path.string() + ": " + (msg ? msg : "unknown"));
    }
    if (n == 0) break;
    for (int i = 0; i < n; ++i) {
      const char c = buf[static_cast<std::size_t>(i)];
      if (c == '\n') {
        if (!current.empty() && current.back() == '\r') current.pop_back();
        lines.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(c);
      }
    }
  }
  if (!current.empty()) {
    if (current.back() == '\r') current.pop_back();
    lines.push_back(std::move(current));
  }
  return lines;
}

}  // namespace logicdec
