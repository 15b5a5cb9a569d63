#include <gtest/gtest.h>

#include <random>

#include "featstream/bitstream.hpp"
#include "featstream/container.hpp"
#include "featstream/error.hpp"
#include "test_helpers.hpp"

using namespace featstream;

namespace {

// FDF1 for tiny() under zlib level 6, assembled with Python's struct and zlib.
const std::vector<std::uint8_t> kTinyZlib = {
    0x46, 0x44, 0x46, 0x31, 0x01, 0x02, 0x00, 0x02, 0x01, 0x02, 0x00, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x96, 0x62, 0x79, 0xab, 0x1b, 0x00, 0x6e,
    0x65, 0x74, 0x77, 0x6f, 0x72, 0x6b, 0x3d, 0x6e, 0x0a, 0x6c, 0x61, 0x79, 0x65, 0x72, 0x3d, 0x6c, 0x0a, 0x73,
    0x6f, 0x75, 0x72, 0x63, 0x65, 0x3d, 0x73, 0x0a, 0x78, 0x9c, 0x63, 0x60, 0x68, 0xb0, 0x67, 0x60, 0x50, 0x38,
    0x00, 0x00, 0x05, 0x43, 0x01, 0xa0};
constexpr std::size_t kTinyHeader = 62;

FeatureTensor tiny() { return {{2}, {1.0f, -2.5f}, {"n", "l", Category::Fc, "s"}}; }

}  // namespace

TEST(Bitstream, HeaderSizeFormula) {
    EXPECT_EQ(header_size(3, Mode::Lossless, 0), 43u);
    EXPECT_EQ(header_size(3, Mode::Quantized, 0), 52u);
    EXPECT_EQ(header_size(1, Mode::Lossless, 27), kTinyHeader);
    EXPECT_EQ(header_size(4, Mode::Quantized, 100), 9u + 16 + 9 + 22 + 100);
}

TEST(Bitstream, MatchesReferenceBytes) {
    auto b = encode_feature(tiny(), CodecId::zlib());
    EXPECT_EQ(b.serialize(), kTinyZlib);
    EXPECT_EQ(b.header.encoded_size(), kTinyHeader);
    EXPECT_TRUE(bit_equal(decode_feature(kTinyZlib), tiny()));

    std::size_t consumed = 0;
    auto h = parse_header(kTinyZlib, &consumed);
    EXPECT_EQ(consumed, kTinyHeader);
    EXPECT_EQ(h.codec, CodecId::zlib());
    EXPECT_EQ(h.category, Category::Fc);
    EXPECT_EQ(h.original_len, 8u);
    EXPECT_EQ(h.compressed_len, 16u);
    EXPECT_EQ(h.payload_crc, 0xab796296u);
    EXPECT_EQ(h.meta.source, "s");
}

TEST(Bitstream, LosslessRoundTripEveryCodec) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto t = fstest::small_tensor(seed, (seed % 10) / 9.0);
        t.values[seed % t.size()] = seed % 2 ? -0.0f : 1e-42f;
        for (auto codec : all_codec_ids()) {
            auto b = encode_feature(t, codec);
            EXPECT_EQ(b.header.original_len, t.volume_bytes());
            EXPECT_EQ(b.header.compressed_len, b.payload.size());
            auto back = decode_feature(parse_bitstream(b.serialize()));
            EXPECT_TRUE(bit_equal(back, t)) << codec_name(codec) << " seed " << seed;
        }
    }
}

TEST(Bitstream, QuantizedMode) {
    auto t = fstest::small_tensor(9, 0.5);
    auto q = auto_range(t, 8);
    auto b = encode_feature(t, CodecId::gzip(), {}, Mode::Quantized, q);
    auto bytes = b.serialize();
    EXPECT_EQ(b.header.encoded_size(), header_size(t.dims.size(), Mode::Quantized, encode_meta_text(t.meta).size()));
    auto h = parse_header(bytes);
    ASSERT_TRUE(h.quant);
    EXPECT_EQ(*h.quant, q);
    auto back = decode_feature(bytes);
    EXPECT_EQ(back.dims, t.dims);
    EXPECT_EQ(back.meta, t.meta);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(back.values[i], t.values[i], q.step() / 2 + 1e-5);
}

TEST(Bitstream, QuantizedHeaderFields) {
    auto b = encode_feature(tiny(), CodecId::gzip(), {}, Mode::Quantized, QuantParams{8, -3.0f, 2.55f});
    auto bytes = b.serialize();
    // bits, then min and max as f32le, right after the single extent.
    EXPECT_EQ(bytes[13], 8);
    EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin() + 14, bytes.begin() + 22),
              (std::vector<std::uint8_t>{0x00, 0x00, 0x40, 0xc0, 0x33, 0x33, 0x23, 0x40}));
}

TEST(Bitstream, ModeArgumentChecks) {
    EXPECT_THROW(encode_feature(tiny(), CodecId::gzip(), {}, Mode::Quantized), ArgumentError);
    EXPECT_THROW(encode_feature(tiny(), CodecId::zeromask(), {}, Mode::Quantized, QuantParams{8, 0, 1}), ArgumentError);
    EXPECT_THROW(encode_feature(tiny(), CodecId::gzip(), {}, Mode::Quantized, QuantParams{1, 0, 1}), ArgumentError);
    auto bad = tiny();
    bad.values.push_back(1);
    EXPECT_THROW(encode_feature(bad, CodecId::gzip()), ValidationError);
}

TEST(Bitstream, HeaderErrors) {
    auto magic = kTinyZlib;
    magic[3] = '2';
    EXPECT_THROW(decode_feature(magic), FormatError);
    auto version = kTinyZlib;
    version[4] = 9;
    EXPECT_THROW(decode_feature(version), FormatError);
    auto codec = kTinyZlib;
    codec[5] = 0x00;  // bare store
    EXPECT_THROW(decode_feature(codec), FormatError);
    codec[5] = 0x09;
    EXPECT_THROW(decode_feature(codec), FormatError);
    auto mode = kTinyZlib;
    mode[6] = 2;
    EXPECT_THROW(decode_feature(mode), FormatError);
    auto cat = kTinyZlib;
    cat[7] = 7;
    EXPECT_THROW(decode_feature(cat), FormatError);
    auto nd = kTinyZlib;
    nd[8] = 5;
    EXPECT_THROW(decode_feature(nd), FormatError);
    auto orig = kTinyZlib;
    orig[13] = 12;  // originalLen disagrees with extents
    EXPECT_THROW(decode_feature(orig), CorruptionError);
}

TEST(Bitstream, CrcCheckedBeforeDecode) {
    auto flipped = kTinyZlib;
    flipped.back() ^= 0x01;
    EXPECT_THROW(parse_bitstream(flipped), IntegrityError);
    EXPECT_THROW(decode_feature(flipped), IntegrityError);

    // A payload that would fail to inflate still reports the CRC first.
    auto garbage = kTinyZlib;
    garbage[kTinyHeader] = 0xff;
    EXPECT_THROW(decode_feature(garbage), IntegrityError);
}

TEST(Bitstream, TruncationAndTrailingBytes) {
    for (std::size_t cut = 0; cut < kTinyZlib.size(); ++cut) {
        std::vector<std::uint8_t> head(kTinyZlib.begin(), kTinyZlib.begin() + cut);
        EXPECT_THROW(decode_feature(head), Error) << cut;
    }
    auto longer = kTinyZlib;
    longer.push_back(0);
    EXPECT_THROW(decode_feature(longer), CorruptionError);
}

TEST(Bitstream, RandomDamageNeverCrashesOrLies) {
    std::mt19937_64 rng(5);
    auto t = fstest::small_tensor(31, 0.4);
    for (auto codec : all_codec_ids()) {
        const auto good = encode_feature(t, codec).serialize();
        for (int i = 0; i < 100; ++i) {
            auto bad = good;
            bad[rng() % bad.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
            try {
                auto back = decode_feature(bad);
                // Surviving damage can only be in fields that do not alter values.
                EXPECT_EQ(back.values.size(), t.values.size());
            } catch (const Error&) {
            }
        }
    }
}

TEST(Bitstream, DecodedMetaFollowsHeader) {
    auto b = encode_feature(fstest::small_tensor(3), CodecId::bzip2());
    auto back = decode_feature(b);
    EXPECT_EQ(back.meta.network, "vgg16");
    EXPECT_EQ(back.meta.category, b.header.category);
}
