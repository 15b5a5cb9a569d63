#pragma once

// Zero-mask splitting: a presence bitmap (one bit per element, LSB-first
// within each byte, 1 = stored) plus the f32le concatenation of the stored
// values. An element is elided only when its bit pattern is +0.0, so -0.0
// survives the round trip.
//
// Framed payload produced by compress_payload for zero-mask codecs:
//   u64 element count
//   u64 nnz
//   u64 maskLen,   maskLen bytes   (mask, compressed by the inner backend)
//   u64 valuesLen, valuesLen bytes (nonzero values, compressed likewise)

#include <cstdint>
#include <span>
#include <vector>

#include "featstream/tensor.hpp"

namespace featstream {

/// Fixed framing bytes of a zero-mask payload (four u64 fields).
inline constexpr std::size_t kZeroMaskFramingBytes = 32;

struct ZeroMaskParts {
    std::vector<std::uint8_t> mask;      // ceil(n / 8) bytes
    std::vector<std::uint8_t> nonzeros;  // 4 * nnz bytes
};

ZeroMaskParts zero_mask_encode(std::span<const float> values);
ZeroMaskParts zero_mask_encode(const FeatureTensor& t);

/// Throws CorruptionError when the mask is shorter than `count` bits, a padding
/// bit is set, or the popcount disagrees with the nonzero byte count.
std::vector<float> zero_mask_decode(std::span<const std::uint8_t> mask, std::span<const std::uint8_t> nonzeros,
                                    std::size_t count);
FeatureTensor zero_mask_decode(std::span<const std::uint8_t> mask, std::span<const std::uint8_t> nonzeros,
                               std::span<const std::uint32_t> dims);

}  // namespace featstream
