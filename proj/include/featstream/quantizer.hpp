#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "featstream/tensor.hpp"

namespace featstream {

/// Affine uniform quantizer over [min_val, max_val] with 2^bits levels.
struct QuantParams {
    int bits = 8;
    float min_val = 0.0f;
    float max_val = 1.0f;

    static constexpr int kMinBits = 2;
    static constexpr int kMaxBits = 16;

    /// (max_val - min_val) / (2^bits - 1), evaluated in double.
    double step() const;
    std::uint32_t max_code() const { return (std::uint32_t{1} << bits) - 1; }

    /// Throws ArgumentError unless bits is in [2, 16] and min_val < max_val
    /// are finite.
    void validate() const;

    bool operator==(const QuantParams&) const = default;
};

/// Range taken from the tensor's observed min/max. A constant tensor gets a
/// unit-width range so the step stays positive.
QuantParams auto_range(const FeatureTensor& t, int bits);

/// Out-of-range inputs clamp to the nearest end of the range.
std::uint32_t quantize_value(float x, const QuantParams& q);
float dequantize_code(std::uint32_t code, const QuantParams& q);

/// Bytes needed to pack `count` codes of q.bits bits.
std::size_t packed_size(std::size_t count, int bits);

/// Codes packed LSB-first: bit j of the code stream is bit (j % 8) of byte j / 8.
std::vector<std::uint8_t> quantize(std::span<const float> values, const QuantParams& q);
std::vector<std::uint8_t> quantize(const FeatureTensor& t, const QuantParams& q);

/// Throws CorruptionError if `packed` does not hold exactly `count` codes.
std::vector<float> dequantize(std::span<const std::uint8_t> packed, const QuantParams& q, std::size_t count);
FeatureTensor dequantize(std::span<const std::uint8_t> packed, const QuantParams& q,
                         std::span<const std::uint32_t> dims);

struct ErrorMetrics {
    double max_abs_error = 0.0;
    double mean_squared_error = 0.0;
    /// 10 log10(mean(a^2) / MSE); +infinity when MSE is zero.
    double snr_db = 0.0;
};

/// Throws ArgumentError if the dims differ.
ErrorMetrics error_metrics(const FeatureTensor& original, const FeatureTensor& reconstructed);

}  // namespace featstream
