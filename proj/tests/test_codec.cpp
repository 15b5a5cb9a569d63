#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "featstream/codec.hpp"
#include "featstream/container.hpp"
#include "featstream/error.hpp"
#include "featstream/zero_mask.hpp"
#include "test_helpers.hpp"

using namespace featstream;

namespace {

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n, int alphabet) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() % alphabet);
    return out;
}

std::vector<std::uint8_t> sparse_floats(std::uint64_t seed, std::size_t n, double rate) {
    return to_f32le(generate_synthetic(std::vector<std::uint32_t>{static_cast<std::uint32_t>(n)}, rate,
                                       ReluGaussian{}, seed)
                        .values);
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

}  // namespace

TEST(Codec, IdBytesAndNames) {
    EXPECT_EQ(CodecId::gzip().to_byte(), 1);
    EXPECT_EQ(CodecId::zlib().to_byte(), 2);
    EXPECT_EQ(CodecId::bzip2().to_byte(), 3);
    EXPECT_EQ(CodecId::lzma().to_byte(), 4);
    EXPECT_EQ(CodecId::zeromask().to_byte(), 0x80);
    EXPECT_EQ(CodecId::zeromask(Backend::Lzma).to_byte(), 0x84);

    const auto all = all_codec_ids();
    ASSERT_EQ(all.size(), 9u);
    for (auto c : all) {
        EXPECT_EQ(CodecId::from_byte(c.to_byte()), c);
        EXPECT_EQ(parse_codec(codec_name(c)), c);
    }
    EXPECT_EQ(codec_name(CodecId::zeromask()), "zeromask");
    EXPECT_EQ(codec_name(CodecId::zeromask(Backend::Gzip)), "zeromask+gzip");

    for (int b : {0x00, 0x05, 0x7f, 0x85, 0xff}) EXPECT_THROW(CodecId::from_byte(static_cast<std::uint8_t>(b)), ArgumentError) << b;
    for (const char* bad : {"", "store", "zip", "zeromask+store", "zeromask+zeromask", "GZIP"})
        EXPECT_THROW(parse_codec(bad), ArgumentError) << bad;
}

TEST(Codec, DefaultLevels) {
    EXPECT_EQ(default_level(Backend::Gzip), 6);
    EXPECT_EQ(default_level(Backend::Zlib), 6);
    EXPECT_EQ(default_level(Backend::Bzip2), 9);
    EXPECT_EQ(default_level(Backend::Lzma), 6);
}

TEST(Codec, TopLevelStoreRejected) {
    std::vector<std::uint8_t> raw(16);
    EXPECT_THROW(compress_payload(raw, CodecId{Backend::Store, false}), ArgumentError);
}

TEST(Codec, LevelRange) {
    std::vector<std::uint8_t> raw(64, 7);
    EXPECT_THROW(compress_payload(raw, CodecId::bzip2(), {0}), ArgumentError);
    EXPECT_THROW(compress_payload(raw, CodecId::gzip(), {10}), ArgumentError);
    EXPECT_THROW(compress_payload(raw, CodecId::lzma(), {-1}), ArgumentError);
    for (int level = 0; level <= 9; ++level) {
        auto c = compress_payload(raw, CodecId::zlib(), {level});
        EXPECT_EQ(decompress_payload(c, CodecId::zlib()), raw);
    }
}

// Sizes match Python's gzip.compress(bytes(n), 6, mtime=0), zlib.compress(bytes(n), 6),
// bz2.compress(bytes(n), 9) and lzma.compress(bytes(n), FORMAT_ALONE, preset=6).
TEST(Codec, FrozenZeroBufferSizes) {
    struct Case {
        std::size_t n, gzip, zlib;
    };
    for (auto [n, gz, zl] : {Case{98304, 129, 117}, Case{100352, 131, 119}, Case{401408, 423, 411}}) {
        std::vector<std::uint8_t> zeros(n);
        EXPECT_EQ(compress_payload(zeros, CodecId::gzip()).size(), gz) << n;
        EXPECT_EQ(compress_payload(zeros, CodecId::zlib()).size(), zl) << n;
    }
    std::vector<std::uint8_t> zeros(401408);
    EXPECT_EQ(compress_payload(zeros, CodecId::bzip2()).size(), 47u);
    EXPECT_EQ(compress_payload(zeros, CodecId::lzma()).size(), 146u);
}

TEST(Codec, RoundTripProperty) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 60; ++i) {
        const std::size_t n = 4 * (rng() % 20000);
        std::vector<std::uint8_t> raw = i % 2 ? random_bytes(rng, n, 1 + rng() % 256) : sparse_floats(i, n / 4 + 1, 0.2);
        for (auto codec : all_codec_ids()) {
            auto c = compress_payload(raw, codec);
            EXPECT_EQ(decompress_payload(c, codec), raw) << codec_name(codec) << " n=" << raw.size();
            EXPECT_EQ(decompress_payload(c, codec, raw.size()), raw);
        }
    }
}

TEST(Codec, EmptyInput) {
    std::vector<std::uint8_t> empty;
    for (auto codec : all_codec_ids()) EXPECT_EQ(decompress_payload(compress_payload(empty, codec), codec), empty);
}

TEST(Codec, ZeroMaskNeedsWholeFloats) {
    std::vector<std::uint8_t> raw(7);
    EXPECT_THROW(compress_payload(raw, CodecId::zeromask()), ArgumentError);
}

TEST(Codec, CorruptInputsThrowCorruptionError) {
    std::mt19937_64 rng(12);
    const auto raw = sparse_floats(3, 5000, 0.3);
    for (auto codec : all_codec_ids()) {
        const auto good = compress_payload(raw, codec);
        for (std::size_t cut : {std::size_t{0}, std::size_t{1}, good.size() / 2, good.size() - 1}) {
            std::vector<std::uint8_t> head(good.begin(), good.begin() + cut);
            EXPECT_THROW(decompress_payload(head, codec), CorruptionError) << codec_name(codec) << " cut " << cut;
        }
        auto trailing = good;
        trailing.push_back(0x5a);
        EXPECT_THROW(decompress_payload(trailing, codec), CorruptionError) << codec_name(codec);

        // Random damage must raise a library error or, rarely, decode to something else.
        for (int k = 0; k < 50; ++k) {
            auto bad = good;
            bad[rng() % bad.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
            try {
                decompress_payload(bad, codec);
            } catch (const CorruptionError&) {
            }
        }
    }
}

TEST(Codec, ConcatenatedMembersDecode) {
    std::vector<std::uint8_t> a(1000, 1), b(500, 2);
    for (auto codec : {CodecId::gzip(), CodecId::bzip2()}) {
        auto ca = compress_payload(a, codec), cb = compress_payload(b, codec);
        ca.insert(ca.end(), cb.begin(), cb.end());
        auto out = decompress_payload(ca, codec);
        std::vector<std::uint8_t> want = a;
        want.insert(want.end(), b.begin(), b.end());
        EXPECT_EQ(out, want) << codec_name(codec);
    }
}

TEST(ZeroMask, LsbFirstMask) {
    std::vector<float> v{0, 1.5f, 0, 0, 0, 0, 0, 0, 2.0f, 0};
    auto parts = zero_mask_encode(v);
    EXPECT_EQ(parts.mask, (std::vector<std::uint8_t>{0x02, 0x01}));
    EXPECT_EQ(parts.nonzeros, to_f32le(std::vector<float>{1.5f, 2.0f}));
    EXPECT_EQ(zero_mask_decode(parts.mask, parts.nonzeros, v.size()), v);
}

TEST(ZeroMask, KeepsNegativeZero) {
    std::vector<float> v{-0.0f, 0.0f, 3.0f};
    auto parts = zero_mask_encode(v);
    EXPECT_EQ(parts.mask, std::vector<std::uint8_t>{0x05});
    auto back = zero_mask_decode(parts.mask, parts.nonzeros, v.size());
    EXPECT_TRUE(std::signbit(back[0]));
    EXPECT_FALSE(std::signbit(back[1]));
}

TEST(ZeroMask, RejectsInconsistentParts) {
    std::vector<std::uint8_t> mask{0x05}, two = to_f32le(std::vector<float>{1, 2}), one = to_f32le(std::vector<float>{1});
    EXPECT_NO_THROW(zero_mask_decode(mask, two, 3));
    EXPECT_THROW(zero_mask_decode(mask, one, 3), CorruptionError);
    EXPECT_THROW(zero_mask_decode(mask, two, 9), CorruptionError);                   // mask too short
    EXPECT_THROW(zero_mask_decode(std::vector<std::uint8_t>{0x0d}, two, 3), CorruptionError);  // padding bit set
}

TEST(ZeroMask, StoreSizeIsExact) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + rng() % 4000;
        auto raw = sparse_floats(i, n, std::uniform_real_distribution<double>(0, 1)(rng));
        const auto nnz = compute_stats(FeatureTensor{{static_cast<std::uint32_t>(n)}, from_f32le(raw), {}}).nonzero_count;
        EXPECT_EQ(compress_payload(raw, CodecId::zeromask()).size(), kZeroMaskFramingBytes + (n + 7) / 8 + 4 * nnz);
    }
}

class ReferenceTools : public ::testing::Test {
protected:
    fstest::TempDir dir;
    std::vector<std::uint8_t> raw = sparse_floats(21, 30000, 0.15);

    void SetUp() override { write_file(dir / "raw.bin", raw); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

TEST_F(ReferenceTools, GzipBothWays) {
    if (!fstest::have_tool("gzip")) GTEST_SKIP() << "gzip not installed";
    write_file(dir / "ours.gz", compress_payload(raw, CodecId::gzip()));
    ASSERT_EQ(run("gzip -dc " + path("ours.gz") + " > " + path("ours.out")), 0);
    EXPECT_EQ(read_file(dir / "ours.out"), raw);
    ASSERT_EQ(run("gzip -9c " + path("raw.bin") + " > " + path("ref.gz")), 0);
    EXPECT_EQ(decompress_payload(read_file(dir / "ref.gz"), CodecId::gzip()), raw);
}

TEST_F(ReferenceTools, Bzip2BothWays) {
    if (!fstest::have_tool("bzip2")) GTEST_SKIP() << "bzip2 not installed";
    write_file(dir / "ours.bz2", compress_payload(raw, CodecId::bzip2()));
    ASSERT_EQ(run("bzip2 -dc " + path("ours.bz2") + " > " + path("ours.out")), 0);
    EXPECT_EQ(read_file(dir / "ours.out"), raw);
    ASSERT_EQ(run("bzip2 -1c " + path("raw.bin") + " > " + path("ref.bz2")), 0);
    EXPECT_EQ(decompress_payload(read_file(dir / "ref.bz2"), CodecId::bzip2()), raw);
}

TEST_F(ReferenceTools, LzmaAloneBothWays) {
    if (!fstest::have_tool("xz")) GTEST_SKIP() << "xz not installed";
    write_file(dir / "ours.lzma", compress_payload(raw, CodecId::lzma()));
    ASSERT_EQ(run("xz --format=lzma -dc " + path("ours.lzma") + " > " + path("ours.out")), 0);
    EXPECT_EQ(read_file(dir / "ours.out"), raw);
    ASSERT_EQ(run("xz --format=lzma -2c " + path("raw.bin") + " > " + path("ref.lzma")), 0);
    EXPECT_EQ(decompress_payload(read_file(dir / "ref.lzma"), CodecId::lzma()), raw);
}

TEST_F(ReferenceTools, ZlibAgainstPython) {
    if (!fstest::have_tool("python3")) GTEST_SKIP() << "python3 not installed";
    write_file(dir / "ours.z", compress_payload(raw, CodecId::zlib()));
    ASSERT_EQ(run("python3 -c \"import sys,zlib; d=open(sys.argv[1],'rb').read(); "
                  "assert zlib.decompress(d)==open(sys.argv[2],'rb').read()\" " +
                  path("ours.z") + " " + path("raw.bin")),
              0);
}
