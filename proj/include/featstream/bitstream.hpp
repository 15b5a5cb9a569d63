#pragma once

// FDF1: the self-describing compressed feature bitstream. Little-endian.
//
//   magic "FDF1" | u8 version (1) | u8 codecId | u8 mode | u8 category | u8 ndims
//   ndims x u32 extents
//   [QUANTIZED only] u8 bits | f32 minVal | f32 maxVal
//   u64 originalLen (= product(extents) * 4)
//   u64 compressedLen
//   u32 payloadCrc (CRC-32 of the compressed payload)
//   u16 metaLen | metaLen bytes of key=value lines
//   compressedLen bytes of payload
//
// LOSSLESS payloads compress the raw f32le values; QUANTIZED payloads
// compress the bit-packed quantizer codes.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "featstream/codec.hpp"
#include "featstream/quantizer.hpp"
#include "featstream/tensor.hpp"

namespace featstream {

inline constexpr char kBitstreamMagic[4] = {'F', 'D', 'F', '1'};
inline constexpr std::uint8_t kBitstreamVersion = 1;

enum class Mode : std::uint8_t { Lossless = 0, Quantized = 1 };

std::string_view to_string(Mode m);

struct BitstreamHeader {
    std::uint8_t version = kBitstreamVersion;
    CodecId codec;
    Mode mode = Mode::Lossless;
    Category category = Category::Conv;
    std::vector<std::uint32_t> dims;
    std::optional<QuantParams> quant;  // present iff mode == Quantized
    std::uint64_t original_len = 0;
    std::uint64_t compressed_len = 0;
    std::uint32_t payload_crc = 0;
    FeatureMeta meta;  // network / layer / source; category mirrors the field above

    /// Serialized byte length of this header.
    std::size_t encoded_size() const;
};

/// Header length for a given rank, mode and meta text length. Constant for
/// fixed arguments: 9 + 4 * ndims + (9 if quantized) + 22 + metaLen.
std::size_t header_size(std::size_t ndims, Mode mode, std::size_t meta_len);

struct FeatureBitstream {
    BitstreamHeader header;
    std::vector<std::uint8_t> payload;

    std::vector<std::uint8_t> serialize() const;
    std::size_t total_size() const { return header.encoded_size() + payload.size(); }
};

/// Encodes one feature. QUANTIZED mode requires `quant` and a codec without
/// zero-mask (packed codes are not f32 words).
FeatureBitstream encode_feature(const FeatureTensor& t, CodecId codec, const CodecParams& params = {},
                                Mode mode = Mode::Lossless, std::optional<QuantParams> quant = std::nullopt);

/// Parses and validates the header only. `consumed` receives its length.
BitstreamHeader parse_header(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

/// Splits a serialized stream into header and payload, checking lengths and
/// the payload CRC (IntegrityError) before anything is decompressed.
FeatureBitstream parse_bitstream(std::span<const std::uint8_t> bytes);

FeatureTensor decode_feature(const FeatureBitstream& b);
FeatureTensor decode_feature(std::span<const std::uint8_t> bytes);

}  // namespace featstream
