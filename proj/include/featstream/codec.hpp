#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace featstream {

/// Generic lossless backend. Store is the identity and is only valid as the
/// inner stage of the zero-mask codec.
enum class Backend : std::uint8_t {
    Store = 0,
    Gzip = 1,   // RFC 1952
    Zlib = 2,   // RFC 1950
    Bzip2 = 3,
    Lzma = 4,   // .lzma "alone" format
};

/// A backend, optionally preceded by zero-mask splitting. Encoded on the wire
/// as one byte: backend in the low bits, 0x80 for zero-mask. Zero-mask cannot
/// nest, by construction.
struct CodecId {
    Backend backend = Backend::Gzip;
    bool zero_mask = false;

    static constexpr CodecId gzip() { return {Backend::Gzip, false}; }
    static constexpr CodecId zlib() { return {Backend::Zlib, false}; }
    static constexpr CodecId bzip2() { return {Backend::Bzip2, false}; }
    static constexpr CodecId lzma() { return {Backend::Lzma, false}; }
    static constexpr CodecId zeromask(Backend inner = Backend::Store) { return {inner, true}; }

    std::uint8_t to_byte() const;
    /// Throws ArgumentError for bytes that name no codec.
    static CodecId from_byte(std::uint8_t b);

    bool operator==(const CodecId&) const = default;
};

inline constexpr std::uint8_t kZeroMaskFlag = 0x80;

/// "gzip", "zlib", "bzip2", "lzma", "zeromask" (store inner) or
/// "zeromask+gzip" etc.
std::string codec_name(CodecId c);
/// Inverse of codec_name; throws ArgumentError.
CodecId parse_codec(std::string_view name);

/// Every valid codec id: four backends, then zero-mask over store and each
/// backend.
std::vector<CodecId> all_codec_ids();

struct CodecParams {
    /// Effort level; unset selects the backend default.
    std::optional<int> level;
};

/// 6 for gzip/zlib, 9 for bzip2 (block size 900k), preset 6 for lzma.
int default_level(Backend b);

/// Compresses `raw`. For zero-mask codecs `raw` is read as f32le words and
/// must have a length divisible by 4; params apply to the inner backend.
std::vector<std::uint8_t> compress_payload(std::span<const std::uint8_t> raw, CodecId codec,
                                           const CodecParams& params = {});

/// Exact inverse of compress_payload. `size_hint` (the expected output length,
/// if known) presizes buffers. Throws CorruptionError on malformed input.
std::vector<std::uint8_t> decompress_payload(std::span<const std::uint8_t> compressed, CodecId codec,
                                             std::size_t size_hint = 0);

}  // namespace featstream
