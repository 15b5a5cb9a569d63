#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "featstream/container.hpp"
#include "featstream/error.hpp"
#include "test_helpers.hpp"

using namespace featstream;

namespace {

// Built independently with Python's struct and zlib.crc32.
const std::vector<std::uint8_t> kTinyContainer = {
    0x46, 0x54, 0x43, 0x31, 0x01, 0x01, 0x01, 0x02, 0x02, 0x00, 0x00, 0x00, 0x1b, 0x00, 0x00, 0x00,
    0x6e, 0x65, 0x74, 0x77, 0x6f, 0x72, 0x6b, 0x3d, 0x6e, 0x0a, 0x6c, 0x61, 0x79, 0x65, 0x72, 0x3d,
    0x6c, 0x0a, 0x73, 0x6f, 0x75, 0x72, 0x63, 0x65, 0x3d, 0x73, 0x0a, 0x08, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0, 0xf4, 0x02, 0x03, 0x56};

FeatureTensor tiny() { return {{2}, {1.0f, -2.5f}, {"n", "l", Category::Fc, "s"}}; }

}  // namespace

TEST(Container, Crc32CheckValue) {
    const std::string s = "123456789";
    EXPECT_EQ(crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())), 0xCBF43926u);
}

TEST(Container, MatchesReferenceBytes) {
    EXPECT_EQ(write_container(tiny()), kTinyContainer);
    EXPECT_TRUE(bit_equal(read_container(kTinyContainer), tiny()));
}

TEST(Container, StreamAndBufferAgree) {
    std::stringstream ss;
    EXPECT_EQ(write_container(tiny(), ss), kTinyContainer.size());
    EXPECT_EQ(ss.str(), std::string(kTinyContainer.begin(), kTinyContainer.end()));
    EXPECT_TRUE(bit_equal(read_container(ss), tiny()));
}

TEST(Container, RoundTripProperty) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto t = fstest::small_tensor(seed, (seed % 11) / 10.0);
        if (seed % 7 == 0) t.values[0] = -0.0f;
        auto bytes = write_container(t);
        EXPECT_TRUE(bit_equal(read_container(bytes), t)) << seed;
    }
}

TEST(Container, HeaderErrorsAreFormatErrors) {
    auto bad_magic = kTinyContainer;
    bad_magic[0] = 'X';
    EXPECT_THROW(read_container(bad_magic), FormatError);
    auto bad_version = kTinyContainer;
    bad_version[4] = 2;
    EXPECT_THROW(read_container(bad_version), FormatError);
    auto bad_elem = kTinyContainer;
    bad_elem[5] = 2;
    EXPECT_THROW(read_container(bad_elem), FormatError);
    auto bad_ndims = kTinyContainer;
    bad_ndims[6] = 0;
    EXPECT_THROW(read_container(bad_ndims), FormatError);
    auto bad_cat = kTinyContainer;
    bad_cat[7] = 3;
    EXPECT_THROW(read_container(bad_cat), FormatError);
}

TEST(Container, DamageIsDetected) {
    auto flipped = kTinyContainer;
    flipped[55] ^= 0x01;  // payload byte
    EXPECT_THROW(read_container(flipped), IntegrityError);

    for (std::size_t cut = 0; cut < kTinyContainer.size(); ++cut) {
        std::vector<std::uint8_t> head(kTinyContainer.begin(), kTinyContainer.begin() + cut);
        EXPECT_THROW(read_container(head), Error) << cut;
    }
    auto trailing = kTinyContainer;
    trailing.push_back(0);
    EXPECT_THROW(read_container(trailing), CorruptionError);

    auto wrong_len = kTinyContainer;
    wrong_len[43] = 12;  // payloadLen no longer matches dims
    EXPECT_THROW(read_container(wrong_len), CorruptionError);
}

TEST(Container, RandomBitFlipsNeverCrash) {
    std::mt19937_64 rng(3);
    const auto good = write_container(fstest::small_tensor(5));
    for (int i = 0; i < 2000; ++i) {
        auto b = good;
        b[rng() % b.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        try {
            read_container(b);
        } catch (const Error&) {
        }
    }
}

TEST(Container, RejectsInvalidTensorsOnWrite) {
    auto t = tiny();
    t.values.push_back(0);
    EXPECT_THROW(write_container(t), ValidationError);
}

TEST(Container, Files) {
    fstest::TempDir dir;
    save_container(dir / "a.ftc", tiny());
    EXPECT_TRUE(bit_equal(load_container(dir / "a.ftc"), tiny()));
    EXPECT_EQ(read_file(dir / "a.ftc"), kTinyContainer);
    EXPECT_THROW(load_container(dir / "missing.ftc"), IoError);
    EXPECT_THROW(save_container(dir / "no/such/dir/a.ftc", tiny()), IoError);
}
