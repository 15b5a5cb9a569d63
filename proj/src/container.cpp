#include "featstream/container.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>

#include "byte_io.hpp"
#include "featstream/error.hpp"

namespace featstream {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    const std::uint8_t* p = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
        auto chunk = static_cast<uInt>(std::min<std::size_t>(left, std::numeric_limits<uInt>::max()));
        crc = ::crc32(crc, p, chunk);
        p += chunk;
        left -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

namespace {

constexpr std::size_t kFixedPrefix = 8;

Category decode_category(std::uint8_t b) {
    if (b > 2) throw FormatError("unknown category tag " + std::to_string(b));
    return static_cast<Category>(b);
}

// Validated fixed prefix, shared by the span and stream readers.
struct Prefix {
    std::vector<std::uint32_t> dims;
    Category category{};
};

Prefix check_prefix(std::span<const std::uint8_t> fixed) {
    if (std::memcmp(fixed.data(), kContainerMagic, 4) != 0) throw FormatError("not an FTC1 container (bad magic)");
    if (fixed[4] != kContainerVersion) throw FormatError("unsupported FTC1 version " + std::to_string(fixed[4]));
    if (fixed[5] != kElemTypeF32) throw FormatError("unsupported element type " + std::to_string(fixed[5]));
    if (fixed[6] == 0 || fixed[6] > kMaxDims) throw FormatError("bad ndims " + std::to_string(fixed[6]));
    Prefix p;
    p.category = decode_category(fixed[7]);
    p.dims.resize(fixed[6]);
    return p;
}

FeatureTensor finish(Prefix prefix, std::string meta_text, std::span<const std::uint8_t> payload,
                     std::uint32_t stored_crc) {
    if (crc32(payload) != stored_crc) throw IntegrityError("FTC1 payload CRC mismatch");
    FeatureTensor t;
    t.dims = std::move(prefix.dims);
    t.meta.category = prefix.category;
    decode_meta_text(meta_text, t.meta);
    t.values = from_f32le(payload);
    validate(t);
    return t;
}

std::uint64_t expected_payload(const std::vector<std::uint32_t>& dims) {
    try {
        return std::uint64_t{element_count(dims)} * 4;
    } catch (const ValidationError& e) {
        throw CorruptionError(std::string("FTC1 dims invalid: ") + e.what());
    }
}

}  // namespace

std::vector<std::uint8_t> write_container(const FeatureTensor& t) {
    validate(t);
    const auto meta = encode_meta_text(t.meta);
    const auto payload = to_f32le(t.values);

    std::vector<std::uint8_t> out;
    out.reserve(kFixedPrefix + 4 * t.dims.size() + 4 + meta.size() + 8 + payload.size() + 4);
    detail::ByteWriter w(out);
    w.text({kContainerMagic, 4});
    w.u8(kContainerVersion);
    w.u8(kElemTypeF32);
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    w.u8(static_cast<std::uint8_t>(t.meta.category));
    for (auto d : t.dims) w.u32(d);
    w.u32(static_cast<std::uint32_t>(meta.size()));
    w.text(meta);
    w.u64(payload.size());
    w.bytes(payload);
    w.u32(crc32(payload));
    return out;
}

std::size_t write_container(const FeatureTensor& t, std::ostream& sink) {
    auto bytes = write_container(t);
    sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!sink) throw IoError("failed writing FTC1 container");
    return bytes.size();
}

FeatureTensor read_container(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    if (bytes.size() < kFixedPrefix) {
        if (bytes.size() >= 4 && std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
            throw FormatError("not an FTC1 container (bad magic)");
        throw CorruptionError("FTC1 stream shorter than its fixed header");
    }
    auto prefix = check_prefix(r.bytes(kFixedPrefix));
    for (auto& d : prefix.dims) d = r.u32();
    auto meta_len = r.u32();
    auto meta = r.text(meta_len);
    auto payload_len = r.u64();
    if (payload_len != expected_payload(prefix.dims))
        throw CorruptionError("FTC1 payload length " + std::to_string(payload_len) + " does not match dims");
    if (payload_len > r.remaining()) throw CorruptionError("FTC1 payload truncated");
    auto payload = r.bytes(static_cast<std::size_t>(payload_len));
    auto crc = r.u32();
    if (r.remaining() != 0) throw CorruptionError("trailing bytes after FTC1 container");
    return finish(std::move(prefix), std::move(meta), payload, crc);
}

FeatureTensor read_container(std::istream& source) {
    auto read_exact = [&](std::size_t n) {
        std::vector<std::uint8_t> buf(n);
        if (n > 0) source.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(source.gcount()) != n || (n > 0 && !source))
            throw CorruptionError("FTC1 stream truncated");
        return buf;
    };
    auto fixed = read_exact(kFixedPrefix);
    auto prefix = check_prefix(fixed);
    auto ext = read_exact(4 * prefix.dims.size() + 4);
    detail::ByteReader er(ext);
    for (auto& d : prefix.dims) d = er.u32();
    auto meta_len = er.u32();
    auto meta_bytes = read_exact(meta_len);
    auto len_bytes = read_exact(8);
    auto payload_len = detail::ByteReader(len_bytes).u64();
    if (payload_len != expected_payload(prefix.dims))
        throw CorruptionError("FTC1 payload length " + std::to_string(payload_len) + " does not match dims");
    auto payload = read_exact(static_cast<std::size_t>(payload_len));
    auto crc_bytes = read_exact(4);
    auto crc = detail::ByteReader(crc_bytes).u32();
    return finish(std::move(prefix), std::string(meta_bytes.begin(), meta_bytes.end()), payload, crc);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

void save_container(const std::filesystem::path& path, const FeatureTensor& t) {
    write_file(path, write_container(t));
}

FeatureTensor load_container(const std::filesystem::path& path) { return read_container(read_file(path)); }

}  // namespace featstream
