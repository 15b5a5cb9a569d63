#include "featstream/bitstream.hpp"

#include <cstring>
#include <limits>

#include "byte_io.hpp"
#include "featstream/container.hpp"
#include "featstream/error.hpp"

namespace featstream {

std::string_view to_string(Mode m) { return m == Mode::Quantized ? "quantized" : "lossless"; }

std::size_t header_size(std::size_t ndims, Mode mode, std::size_t meta_len) {
    return 9 + 4 * ndims + (mode == Mode::Quantized ? 9 : 0) + 22 + meta_len;
}

std::size_t BitstreamHeader::encoded_size() const {
    return header_size(dims.size(), mode, encode_meta_text(meta).size());
}

namespace {

void write_header(const BitstreamHeader& h, std::vector<std::uint8_t>& out) {
    const auto meta = encode_meta_text(h.meta);
    if (meta.size() > std::numeric_limits<std::uint16_t>::max())
        throw ArgumentError("bitstream metadata exceeds 65535 bytes");
    detail::ByteWriter w(out);
    w.text({kBitstreamMagic, 4});
    w.u8(h.version);
    w.u8(h.codec.to_byte());
    w.u8(static_cast<std::uint8_t>(h.mode));
    w.u8(static_cast<std::uint8_t>(h.category));
    w.u8(static_cast<std::uint8_t>(h.dims.size()));
    for (auto d : h.dims) w.u32(d);
    if (h.mode == Mode::Quantized) {
        w.u8(static_cast<std::uint8_t>(h.quant->bits));
        w.f32(h.quant->min_val);
        w.f32(h.quant->max_val);
    }
    w.u64(h.original_len);
    w.u64(h.compressed_len);
    w.u32(h.payload_crc);
    w.u16(static_cast<std::uint16_t>(meta.size()));
    w.text(meta);
}

}  // namespace

std::vector<std::uint8_t> FeatureBitstream::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(total_size());
    write_header(header, out);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

FeatureBitstream encode_feature(const FeatureTensor& t, CodecId codec, const CodecParams& params, Mode mode,
                                std::optional<QuantParams> quant) {
    validate(t);
    FeatureBitstream b;
    auto& h = b.header;
    h.codec = codec;
    h.mode = mode;
    h.category = t.meta.category;
    h.dims = t.dims;
    h.meta = t.meta;
    h.original_len = t.volume_bytes();

    if (mode == Mode::Quantized) {
        if (!quant) throw ArgumentError("quantized mode requires quantizer parameters");
        if (codec.zero_mask) throw ArgumentError("zeromask codecs cannot carry quantized codes");
        quant->validate();
        h.quant = quant;
        b.payload = compress_payload(quantize(t.values, *quant), codec, params);
    } else {
        b.payload = compress_payload(to_f32le(t.values), codec, params);
    }
    h.compressed_len = b.payload.size();
    h.payload_crc = crc32(b.payload);
    return b;
}

BitstreamHeader parse_header(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBitstreamMagic, 4) != 0)
        throw FormatError("not an FDF1 bitstream (bad magic)");
    detail::ByteReader r(bytes);
    r.bytes(4);
    BitstreamHeader h;
    h.version = r.u8();
    if (h.version != kBitstreamVersion) throw FormatError("unsupported FDF1 version " + std::to_string(h.version));
    const auto codec_byte = r.u8();
    try {
        h.codec = CodecId::from_byte(codec_byte);
    } catch (const ArgumentError&) {
        throw FormatError("unknown codec id " + std::to_string(codec_byte));
    }
    const auto mode = r.u8();
    if (mode > 1) throw FormatError("unknown mode " + std::to_string(mode));
    h.mode = static_cast<Mode>(mode);
    const auto cat = r.u8();
    if (cat > 2) throw FormatError("unknown category " + std::to_string(cat));
    h.category = static_cast<Category>(cat);
    const auto ndims = r.u8();
    if (ndims == 0 || ndims > kMaxDims) throw FormatError("bad ndims " + std::to_string(ndims));
    h.dims.resize(ndims);
    for (auto& d : h.dims) d = r.u32();
    if (h.mode == Mode::Quantized) {
        QuantParams q;
        q.bits = r.u8();
        q.min_val = r.f32();
        q.max_val = r.f32();
        try {
            q.validate();
        } catch (const ArgumentError& e) {
            throw FormatError(std::string("bad quantizer parameters: ") + e.what());
        }
        h.quant = q;
    }
    h.original_len = r.u64();
    h.compressed_len = r.u64();
    h.payload_crc = r.u32();
    const auto meta_len = r.u16();
    decode_meta_text(r.text(meta_len), h.meta);
    h.meta.category = h.category;

    std::uint64_t expected = 0;
    try {
        expected = std::uint64_t{element_count(h.dims)} * 4;
    } catch (const ValidationError& e) {
        throw CorruptionError(std::string("FDF1 dims invalid: ") + e.what());
    }
    if (h.original_len != expected) throw CorruptionError("FDF1 originalLen does not match extents");
    if (consumed) *consumed = r.position();
    return h;
}

FeatureBitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
    FeatureBitstream b;
    std::size_t at = 0;
    b.header = parse_header(bytes, &at);
    const auto rest = bytes.subspan(at);
    if (rest.size() != b.header.compressed_len)
        throw CorruptionError("FDF1 payload is " + std::to_string(rest.size()) + " bytes, header declares " +
                              std::to_string(b.header.compressed_len));
    if (crc32(rest) != b.header.payload_crc) throw IntegrityError("FDF1 payload CRC mismatch");
    b.payload.assign(rest.begin(), rest.end());
    return b;
}

FeatureTensor decode_feature(const FeatureBitstream& b) {
    const auto& h = b.header;
    if (b.payload.size() != h.compressed_len) throw CorruptionError("FDF1 payload length mismatch");
    if (crc32(b.payload) != h.payload_crc) throw IntegrityError("FDF1 payload CRC mismatch");

    FeatureTensor t;
    t.dims = h.dims;
    t.meta = h.meta;
    t.meta.category = h.category;
    const auto n = static_cast<std::size_t>(h.original_len / 4);
    if (h.mode == Mode::Quantized) {
        if (!h.quant) throw FormatError("quantized bitstream without quantizer parameters");
        const auto expected = packed_size(n, h.quant->bits);
        const auto codes = decompress_payload(b.payload, h.codec, expected);
        if (codes.size() != expected) throw CorruptionError("decoded code length mismatch");
        t.values = dequantize(codes, *h.quant, n);
    } else {
        const auto raw = decompress_payload(b.payload, h.codec, static_cast<std::size_t>(h.original_len));
        if (raw.size() != h.original_len) throw CorruptionError("decoded payload length mismatch");
        t.values = from_f32le(raw);
    }
    validate(t);
    return t;
}

FeatureTensor decode_feature(std::span<const std::uint8_t> bytes) { return decode_feature(parse_bitstream(bytes)); }

}  // namespace featstream
