#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "featstream/error.hpp"
#include "featstream/quantizer.hpp"
#include "test_helpers.hpp"

using namespace featstream;

TEST(Quantizer, WorkedExample) {
    QuantParams q{8, 0.0f, 2.55f};
    EXPECT_NEAR(q.step(), 0.01, 1e-9);
    EXPECT_EQ(quantize_value(1.27f, q), 127u);
    EXPECT_EQ(dequantize_code(127, q), 1.27f);
    EXPECT_EQ(quantize_value(0.0f, q), 0u);
    EXPECT_EQ(quantize_value(2.55f, q), 255u);
}

TEST(Quantizer, Validation) {
    EXPECT_THROW((QuantParams{1, 0, 1}).validate(), ArgumentError);
    EXPECT_THROW((QuantParams{17, 0, 1}).validate(), ArgumentError);
    EXPECT_THROW((QuantParams{8, 1, 1}).validate(), ArgumentError);
    EXPECT_THROW((QuantParams{8, 2, 1}).validate(), ArgumentError);
    EXPECT_THROW((QuantParams{8, 0, std::numeric_limits<float>::infinity()}).validate(), ArgumentError);
    EXPECT_NO_THROW((QuantParams{16, -1, 1}).validate());
}

TEST(Quantizer, ClampsOutOfRange) {
    QuantParams q{4, -1.0f, 1.0f};
    EXPECT_EQ(quantize_value(-5.0f, q), 0u);
    EXPECT_EQ(quantize_value(5.0f, q), 15u);
    EXPECT_EQ(quantize_value(-std::numeric_limits<float>::max(), q), 0u);
    EXPECT_EQ(dequantize_code(0, q), -1.0f);
    EXPECT_EQ(dequantize_code(15, q), 1.0f);
}

TEST(Quantizer, RoundsHalfAwayFromZero) {
    QuantParams q{2, 0.0f, 3.0f};  // step 1
    EXPECT_EQ(quantize_value(0.5f, q), 1u);
    EXPECT_EQ(quantize_value(1.5f, q), 2u);
    EXPECT_EQ(quantize_value(0.49f, q), 0u);
}

TEST(Quantizer, PackingIsLsbFirst) {
    QuantParams q{3, 0.0f, 7.0f};
    std::vector<float> v{1, 2, 3, 7, 0, 5};
    auto packed = quantize(v, q);
    // Independently: sum(code_i << 3i) as little-endian bytes.
    EXPECT_EQ(packed, (std::vector<std::uint8_t>{0xd1, 0x8e, 0x02}));
    EXPECT_EQ(dequantize(packed, q, v.size()), v);
    EXPECT_EQ(packed_size(6, 3), 3u);
    EXPECT_EQ(packed_size(8, 16), 16u);
    EXPECT_EQ(packed_size(0, 5), 0u);
}

TEST(Quantizer, LengthMismatchIsCorruption) {
    QuantParams q{3, 0.0f, 7.0f};
    std::vector<std::uint8_t> packed{0xd1, 0x8e, 0x02};
    EXPECT_THROW(dequantize(packed, q, 9), CorruptionError);
    EXPECT_THROW(dequantize(packed, q, 2), CorruptionError);
}

TEST(Quantizer, AutoRange) {
    FeatureTensor t{{4}, {0.5f, -2.0f, 3.0f, 0.0f}, {"n", "l", Category::Fc, ""}};
    auto q = auto_range(t, 10);
    EXPECT_EQ(q.bits, 10);
    EXPECT_EQ(q.min_val, -2.0f);
    EXPECT_EQ(q.max_val, 3.0f);

    FeatureTensor flat{{3}, {4.0f, 4.0f, 4.0f}, {"n", "l", Category::Fc, ""}};
    auto f = auto_range(flat, 8);
    EXPECT_LT(f.min_val, f.max_val);
    EXPECT_NO_THROW(f.validate());
    auto back = dequantize(quantize(flat, f), f, flat.dims);
    for (float v : back.values) EXPECT_NEAR(v, 4.0f, f.step() / 2 + 1e-6);
}

TEST(Quantizer, ErrorBoundProperty) {
    std::mt19937_64 rng(77);
    for (int round = 0; round < 100; ++round) {
        const int bits = std::uniform_int_distribution<int>(2, 16)(rng);
        auto t = fstest::small_tensor(rng(), 0.7);
        auto q = auto_range(t, bits);
        auto back = dequantize(quantize(t, q), q, t.dims);
        const double scale = std::max(std::fabs(q.min_val), std::fabs(q.max_val));
        const double ulp = std::nextafter(static_cast<float>(scale), INFINITY) - static_cast<float>(scale);
        for (std::size_t i = 0; i < t.size(); ++i)
            ASSERT_LE(std::fabs(double{back.values[i]} - t.values[i]), q.step() / 2 + 4 * ulp);
    }
}

TEST(Quantizer, ErrorMetrics) {
    FeatureTensor a{{4}, {1, 2, 3, 4}, {"n", "l", Category::Fc, ""}};
    auto b = a;
    auto same = error_metrics(a, b);
    EXPECT_EQ(same.max_abs_error, 0.0);
    EXPECT_EQ(same.mean_squared_error, 0.0);
    EXPECT_TRUE(std::isinf(same.snr_db));

    b.values = {1, 2, 3, 6};
    auto m = error_metrics(a, b);
    EXPECT_EQ(m.max_abs_error, 2.0);
    EXPECT_EQ(m.mean_squared_error, 1.0);
    // signal power (1 + 4 + 9 + 16) / 4 = 7.5
    EXPECT_NEAR(m.snr_db, 10 * std::log10(7.5), 1e-12);

    FeatureTensor c{{2, 2, 1}, {1, 2, 3, 4}, {}};
    EXPECT_THROW(error_metrics(a, c), ArgumentError);
}
