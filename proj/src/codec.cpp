#include "featstream/codec.hpp"

#include "backends.hpp"
#include "byte_io.hpp"
#include "featstream/error.hpp"
#include "featstream/zero_mask.hpp"

namespace featstream {

namespace {

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Store: return "store";
        case Backend::Gzip: return "gzip";
        case Backend::Zlib: return "zlib";
        case Backend::Bzip2: return "bzip2";
        case Backend::Lzma: return "lzma";
    }
    return "?";
}

std::optional<Backend> parse_backend(std::string_view s) {
    for (auto b : {Backend::Store, Backend::Gzip, Backend::Zlib, Backend::Bzip2, Backend::Lzma}) {
        if (backend_name(b) == s) return b;
    }
    return std::nullopt;
}

void check_codec(CodecId c) {
    if (static_cast<std::uint8_t>(c.backend) > static_cast<std::uint8_t>(Backend::Lzma))
        throw ArgumentError("unsupported codec backend " + std::to_string(static_cast<int>(c.backend)));
    if (!c.zero_mask && c.backend == Backend::Store)
        throw ArgumentError("store is only valid as the inner stage of zeromask");
}

}  // namespace

std::uint8_t CodecId::to_byte() const {
    check_codec(*this);
    return static_cast<std::uint8_t>(static_cast<std::uint8_t>(backend) | (zero_mask ? kZeroMaskFlag : 0));
}

CodecId CodecId::from_byte(std::uint8_t b) {
    CodecId c{static_cast<Backend>(b & ~kZeroMaskFlag), (b & kZeroMaskFlag) != 0};
    check_codec(c);
    return c;
}

std::string codec_name(CodecId c) {
    if (!c.zero_mask) return std::string(backend_name(c.backend));
    if (c.backend == Backend::Store) return "zeromask";
    return "zeromask+" + std::string(backend_name(c.backend));
}

CodecId parse_codec(std::string_view name) {
    CodecId c;
    constexpr std::string_view zm = "zeromask";
    if (name.starts_with(zm)) {
        c.zero_mask = true;
        auto rest = name.substr(zm.size());
        if (rest.empty()) {
            c.backend = Backend::Store;
            return c;
        }
        if (rest.front() != '+' || rest == "+store")
            throw ArgumentError("unknown codec '" + std::string(name) + "'");
        name = rest.substr(1);
    }
    auto b = parse_backend(name);
    if (!b) throw ArgumentError("unknown codec '" + std::string(name) + "'");
    c.backend = *b;
    check_codec(c);
    return c;
}

std::vector<CodecId> all_codec_ids() {
    std::vector<CodecId> ids = {CodecId::gzip(), CodecId::zlib(), CodecId::bzip2(), CodecId::lzma()};
    for (auto b : {Backend::Store, Backend::Gzip, Backend::Zlib, Backend::Bzip2, Backend::Lzma})
        ids.push_back(CodecId::zeromask(b));
    return ids;
}

int default_level(Backend b) {
    switch (b) {
        case Backend::Bzip2: return 9;
        case Backend::Store: return 0;
        default: return 6;
    }
}

std::vector<std::uint8_t> compress_payload(std::span<const std::uint8_t> raw, CodecId codec,
                                           const CodecParams& params) {
    check_codec(codec);
    const int level = params.level.value_or(default_level(codec.backend));
    detail::check_level(codec.backend, level);
    if (!codec.zero_mask) return detail::backend_compress(raw, codec.backend, level);

    if (raw.size() % 4 != 0) throw ArgumentError("zeromask input must be a whole number of f32 words");
    const auto values = from_f32le(raw);
    const auto parts = zero_mask_encode(values);
    const auto mask = detail::backend_compress(parts.mask, codec.backend, level);
    const auto nonzeros = detail::backend_compress(parts.nonzeros, codec.backend, level);

    std::vector<std::uint8_t> out;
    out.reserve(kZeroMaskFramingBytes + mask.size() + nonzeros.size());
    detail::ByteWriter w(out);
    w.u64(values.size());
    w.u64(parts.nonzeros.size() / 4);
    w.u64(mask.size());
    w.bytes(mask);
    w.u64(nonzeros.size());
    w.bytes(nonzeros);
    return out;
}

std::vector<std::uint8_t> decompress_payload(std::span<const std::uint8_t> compressed, CodecId codec,
                                             std::size_t size_hint) {
    check_codec(codec);
    if (!codec.zero_mask) return detail::backend_decompress(compressed, codec.backend, size_hint);

    detail::ByteReader r(compressed);
    const auto count = r.u64();
    const auto nnz = r.u64();
    if (nnz > count) throw CorruptionError("zeromask nonzero count exceeds element count");
    const auto mask_len = r.u64();
    if (mask_len > r.remaining()) throw CorruptionError("zeromask mask segment truncated");
    const auto mask_seg = r.bytes(static_cast<std::size_t>(mask_len));
    const auto values_len = r.u64();
    if (values_len != r.remaining()) throw CorruptionError("zeromask value segment length mismatch");
    const auto values_seg = r.bytes(static_cast<std::size_t>(values_len));

    if (size_hint > 0 && size_hint != count * 4) throw CorruptionError("zeromask element count mismatch");
    const auto mask = detail::backend_decompress(mask_seg, codec.backend, static_cast<std::size_t>((count + 7) / 8));
    if (mask.size() != (count + 7) / 8) throw CorruptionError("zeromask mask length mismatch");
    const auto nonzeros = detail::backend_decompress(values_seg, codec.backend, static_cast<std::size_t>(nnz * 4));
    if (nonzeros.size() != nnz * 4) throw CorruptionError("zeromask nonzero count mismatch");
    return to_f32le(zero_mask_decode(mask, nonzeros, static_cast<std::size_t>(count)));
}

}  // namespace featstream
