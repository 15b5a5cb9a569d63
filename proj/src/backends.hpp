#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "featstream/codec.hpp"

namespace featstream::detail {

void check_level(Backend b, int level);
std::vector<std::uint8_t> backend_compress(std::span<const std::uint8_t> raw, Backend b, int level);
std::vector<std::uint8_t> backend_decompress(std::span<const std::uint8_t> in, Backend b, std::size_t hint);

}  // namespace featstream::detail
