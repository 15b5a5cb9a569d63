#pragma once

// FTC1: the raw feature container. All integers little-endian.
//
//   0   magic "FTC1"
//   4   u8  version (1)
//   5   u8  element type (1 = f32le)
//   6   u8  ndims
//   7   u8  category (0 conv, 1 pool, 2 fc)
//   8   ndims x u32 extents (H, W, C)
//       u32 metaLen, metaLen bytes of key=value lines
//       u64 payloadLen (= product(dims) * 4)
//       payloadLen bytes of row-major f32le values
//       u32 CRC-32 of the payload bytes

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "featstream/tensor.hpp"

namespace featstream {

inline constexpr char kContainerMagic[4] = {'F', 'T', 'C', '1'};
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::uint8_t kElemTypeF32 = 1;

/// CRC-32 with the IEEE 802.3 polynomial (as used by gzip and zip).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> write_container(const FeatureTensor& t);
/// Returns the byte count written. Throws IoError if the stream fails.
std::size_t write_container(const FeatureTensor& t, std::ostream& sink);

/// Parses exactly one container occupying all of `bytes`.
FeatureTensor read_container(std::span<const std::uint8_t> bytes);
/// Consumes exactly one container from the stream.
FeatureTensor read_container(std::istream& source);

void save_container(const std::filesystem::path& path, const FeatureTensor& t);
FeatureTensor load_container(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace featstream
