#pragma once

#include <cstdint>
#include <limits>

namespace logicdec {

using TokenId = std::uint32_t;

inline constexpr TokenId kNoToken = std::numeric_limits<TokenId>::max();

}  // namespace logicdec
