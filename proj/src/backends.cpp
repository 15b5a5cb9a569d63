// Lossless backends over zlib, libbz2 and liblzma.

#include "backends.hpp"

#include <bzlib.h>
#include <lzma.h>
#include <zlib.h>

#include <algorithm>
#include <limits>
#include <memory>

#include "featstream/error.hpp"

namespace featstream::detail {

namespace {

// zlib/bzip2 stream fields are 32-bit; feed at most this much per call.
constexpr std::size_t kChunk = 1u << 30;

// Hints come from untrusted headers; past this the buffer grows on demand.
constexpr std::size_t kMaxPresize = std::size_t{1} << 28;

std::size_t initial_capacity(std::size_t in, std::size_t hint) {
    return hint > 0 ? std::min(hint, kMaxPresize) + 64 : std::clamp<std::size_t>(in * 2, 256, kMaxPresize);
}

void grow(std::vector<std::uint8_t>& out, std::size_t used) {
    if (out.size() - used < 64) out.resize(std::max<std::size_t>(out.size() * 2, used + 4096));
}

// ---- DEFLATE family -------------------------------------------------------

constexpr int kGzipWindow = 15 + 16;
constexpr int kZlibWindow = 15;

std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> raw, int window, int level) {
    z_stream zs{};
    if (deflateInit2(&zs, level, Z_DEFLATED, window, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error("deflateInit2 failed");
    std::unique_ptr<z_stream, int (*)(z_stream*)> guard(&zs, deflateEnd);

    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(std::min(raw.size(), kChunk))) + 64);
    std::size_t in_pos = 0;
    std::size_t used = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (zs.avail_in == 0 && in_pos < raw.size()) {
            auto n = std::min(raw.size() - in_pos, kChunk);
            zs.next_in = const_cast<Bytef*>(raw.data() + in_pos);
            zs.avail_in = static_cast<uInt>(n);
            in_pos += n;
        }
        grow(out, used);
        auto room = std::min(out.size() - used, kChunk);
        zs.next_out = out.data() + used;
        zs.avail_out = static_cast<uInt>(room);
        rc = deflate(&zs, in_pos == raw.size() ? Z_FINISH : Z_NO_FLUSH);
        if (rc == Z_STREAM_ERROR) throw Error("deflate failed");
        used += room - zs.avail_out;
    }
    out.resize(used);
    return out;
}

std::vector<std::uint8_t> inflate_bytes(std::span<const std::uint8_t> in, int window, bool multi_member,
                                        std::size_t hint) {
    z_stream zs{};
    if (inflateInit2(&zs, window) != Z_OK) throw Error("inflateInit2 failed");
    std::unique_ptr<z_stream, int (*)(z_stream*)> guard(&zs, inflateEnd);

    std::vector<std::uint8_t> out(initial_capacity(in.size(), hint));
    std::size_t in_pos = 0;
    std::size_t used = 0;
    while (true) {
        if (zs.avail_in == 0 && in_pos < in.size()) {
            auto n = std::min(in.size() - in_pos, kChunk);
            zs.next_in = const_cast<Bytef*>(in.data() + in_pos);
            zs.avail_in = static_cast<uInt>(n);
            in_pos += n;
        }
        grow(out, used);
        auto room = std::min(out.size() - used, kChunk);
        zs.next_out = out.data() + used;
        zs.avail_out = static_cast<uInt>(room);
        int rc = inflate(&zs, Z_NO_FLUSH);
        used += room - zs.avail_out;
        if (rc == Z_STREAM_END) {
            const bool more = zs.avail_in > 0 || in_pos < in.size();
            if (!more) break;
            if (!multi_member) throw CorruptionError("trailing bytes after deflate stream");
            inflateReset(&zs);
            continue;
        }
        if (rc == Z_NEED_DICT || rc == Z_DATA_ERROR || rc == Z_MEM_ERROR)
            throw CorruptionError(std::string("deflate stream corrupt: ") + (zs.msg ? zs.msg : "error"));
        if (rc == Z_BUF_ERROR && zs.avail_in == 0 && in_pos == in.size())
            throw CorruptionError("deflate stream truncated");
    }
    out.resize(used);
    return out;
}

// ---- bzip2 ----------------------------------------------------------------

std::vector<std::uint8_t> bz2_compress(std::span<const std::uint8_t> raw, int level) {
    bz_stream bs{};
    if (BZ2_bzCompressInit(&bs, level, 0, 0) != BZ_OK) throw Error("BZ2_bzCompressInit failed");
    std::unique_ptr<bz_stream, int (*)(bz_stream*)> guard(&bs, BZ2_bzCompressEnd);

    std::vector<std::uint8_t> out(raw.size() + raw.size() / 100 + 600);
    std::size_t in_pos = 0;
    std::size_t used = 0;
    int rc = BZ_RUN_OK;
    while (rc != BZ_STREAM_END) {
        if (bs.avail_in == 0 && in_pos < raw.size()) {
            auto n = std::min(raw.size() - in_pos, kChunk);
            bs.next_in = reinterpret_cast<char*>(const_cast<std::uint8_t*>(raw.data() + in_pos));
            bs.avail_in = static_cast<unsigned>(n);
            in_pos += n;
        }
        grow(out, used);
        auto room = std::min(out.size() - used, kChunk);
        bs.next_out = reinterpret_cast<char*>(out.data() + used);
        bs.avail_out = static_cast<unsigned>(room);
        rc = BZ2_bzCompress(&bs, in_pos == raw.size() ? BZ_FINISH : BZ_RUN);
        if (rc < 0) throw Error("BZ2_bzCompress failed with " + std::to_string(rc));
        used += room - bs.avail_out;
    }
    out.resize(used);
    return out;
}

std::vector<std::uint8_t> bz2_decompress(std::span<const std::uint8_t> in, std::size_t hint) {
    std::vector<std::uint8_t> out(initial_capacity(in.size(), hint));
    std::size_t in_pos = 0;
    std::size_t used = 0;
    // bzip2 files may hold several concatenated streams.
    do {
        bz_stream bs{};
        if (BZ2_bzDecompressInit(&bs, 0, 0) != BZ_OK) throw Error("BZ2_bzDecompressInit failed");
        std::unique_ptr<bz_stream, int (*)(bz_stream*)> guard(&bs, BZ2_bzDecompressEnd);
        while (true) {
            if (bs.avail_in == 0 && in_pos < in.size()) {
                auto n = std::min(in.size() - in_pos, kChunk);
                bs.next_in = reinterpret_cast<char*>(const_cast<std::uint8_t*>(in.data() + in_pos));
                bs.avail_in = static_cast<unsigned>(n);
                in_pos += n;
            }
            grow(out, used);
            auto room = std::min(out.size() - used, kChunk);
            bs.next_out = reinterpret_cast<char*>(out.data() + used);
            bs.avail_out = static_cast<unsigned>(room);
            int rc = BZ2_bzDecompress(&bs);
            used += room - bs.avail_out;
            if (rc == BZ_STREAM_END) {
                in_pos -= bs.avail_in;
                break;
            }
            if (rc != BZ_OK) throw CorruptionError("bzip2 stream corrupt (code " + std::to_string(rc) + ")");
            if (bs.avail_in == 0 && in_pos == in.size() && bs.avail_out > 0)
                throw CorruptionError("bzip2 stream truncated");
        }
    } while (in_pos < in.size());
    out.resize(used);
    return out;
}

// ---- LZMA (.lzma alone) ---------------------------------------------------

std::vector<std::uint8_t> run_lzma(lzma_stream& ls, std::span<const std::uint8_t> in, std::size_t cap,
                                   bool decoding) {
    std::unique_ptr<lzma_stream, void (*)(lzma_stream*)> guard(&ls, lzma_end);
    std::vector<std::uint8_t> out(cap);
    ls.next_in = in.data();
    ls.avail_in = in.size();
    std::size_t used = 0;
    while (true) {
        grow(out, used);
        ls.next_out = out.data() + used;
        ls.avail_out = out.size() - used;
        auto before = ls.avail_out;
        lzma_ret rc = lzma_code(&ls, LZMA_FINISH);
        used += before - ls.avail_out;
        if (rc == LZMA_STREAM_END) break;
        if (rc == LZMA_OK) continue;
        if (!decoding) throw Error("lzma encoder failed with " + std::to_string(rc));
        if (rc == LZMA_BUF_ERROR) throw CorruptionError("lzma stream truncated");
        throw CorruptionError("lzma stream corrupt (code " + std::to_string(rc) + ")");
    }
    if (decoding && ls.avail_in != 0) throw CorruptionError("trailing bytes after lzma stream");
    out.resize(used);
    return out;
}

std::vector<std::uint8_t> lzma_compress(std::span<const std::uint8_t> raw, int preset) {
    lzma_options_lzma opts;
    if (lzma_lzma_preset(&opts, static_cast<std::uint32_t>(preset))) throw ArgumentError("bad lzma preset");
    lzma_stream ls = LZMA_STREAM_INIT;
    if (lzma_alone_encoder(&ls, &opts) != LZMA_OK) throw Error("lzma_alone_encoder failed");
    return run_lzma(ls, raw, raw.size() + raw.size() / 3 + 128, false);
}

std::vector<std::uint8_t> lzma_decompress(std::span<const std::uint8_t> in, std::size_t hint) {
    lzma_stream ls = LZMA_STREAM_INIT;
    if (lzma_alone_decoder(&ls, std::numeric_limits<std::uint64_t>::max()) != LZMA_OK)
        throw Error("lzma_alone_decoder failed");
    return run_lzma(ls, in, initial_capacity(in.size(), hint), true);
}

}  // namespace

void check_level(Backend b, int level) {
    int lo = 0;
    int hi = 9;
    if (b == Backend::Bzip2) lo = 1;
    if (b != Backend::Store && (level < lo || level > hi))
        throw ArgumentError("level " + std::to_string(level) + " outside [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
}

std::vector<std::uint8_t> backend_compress(std::span<const std::uint8_t> raw, Backend b, int level) {
    check_level(b, level);
    switch (b) {
        case Backend::Store: return {raw.begin(), raw.end()};
        case Backend::Gzip: return deflate_bytes(raw, kGzipWindow, level);
        case Backend::Zlib: return deflate_bytes(raw, kZlibWindow, level);
        case Backend::Bzip2: return bz2_compress(raw, level);
        case Backend::Lzma: return lzma_compress(raw, level);
    }
    throw ArgumentError("unsupported backend");
}

std::vector<std::uint8_t> backend_decompress(std::span<const std::uint8_t> in, Backend b, std::size_t hint) {
    switch (b) {
        case Backend::Store: return {in.begin(), in.end()};
        case Backend::Gzip: return inflate_bytes(in, kGzipWindow, true, hint);
        case Backend::Zlib: return inflate_bytes(in, kZlibWindow, false, hint);
        case Backend::Bzip2: return bz2_decompress(in, hint);
        case Backend::Lzma: return lzma_decompress(in, hint);
    }
    throw ArgumentError("unsupported backend");
}

}  // namespace featstream::detail
