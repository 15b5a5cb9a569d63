#include "featstream/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "featstream/error.hpp"

namespace featstream {

double QuantParams::step() const {
    return (static_cast<double>(max_val) - static_cast<double>(min_val)) / static_cast<double>(max_code());
}

void QuantParams::validate() const {
    if (bits < kMinBits || bits > kMaxBits)
        throw ArgumentError("quantizer bits must be in [2, 16], got " + std::to_string(bits));
    if (!std::isfinite(min_val) || !std::isfinite(max_val) || !(min_val < max_val))
        throw ArgumentError("quantizer range requires finite min < max");
}

QuantParams auto_range(const FeatureTensor& t, int bits) {
    QuantParams q;
    q.bits = bits;
    if (t.values.empty()) {
        q.min_val = 0.0f;
        q.max_val = 1.0f;
    } else {
        auto [lo, hi] = std::minmax_element(t.values.begin(), t.values.end());
        q.min_val = *lo;
        q.max_val = *hi;
        if (!(q.min_val < q.max_val)) q.max_val = q.min_val + 1.0f;
        if (!(q.min_val < q.max_val)) q.max_val = std::nextafter(q.min_val, std::numeric_limits<float>::max());
    }
    q.validate();
    return q;
}

std::uint32_t quantize_value(float x, const QuantParams& q) {
    const double clamped = std::clamp(static_cast<double>(x), static_cast<double>(q.min_val),
                                      static_cast<double>(q.max_val));
    // Non-negative, so round() is round-half-away-from-zero here.
    const double code = std::round((clamped - q.min_val) / q.step());
    return static_cast<std::uint32_t>(std::min(code, static_cast<double>(q.max_code())));
}

float dequantize_code(std::uint32_t code, const QuantParams& q) {
    return static_cast<float>(static_cast<double>(q.min_val) + code * q.step());
}

std::size_t packed_size(std::size_t count, int bits) {
    return (count * static_cast<std::size_t>(bits) + 7) / 8;
}

std::vector<std::uint8_t> quantize(std::span<const float> values, const QuantParams& q) {
    q.validate();
    std::vector<std::uint8_t> out(packed_size(values.size(), q.bits), 0);
    std::size_t bit = 0;
    for (float x : values) {
        std::uint32_t code = quantize_value(x, q);
        for (int b = 0; b < q.bits; ++b, ++bit) {
            if (code & (1u << b)) out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
        }
    }
    return out;
}

std::vector<std::uint8_t> quantize(const FeatureTensor& t, const QuantParams& q) { return quantize(t.values, q); }

std::vector<float> dequantize(std::span<const std::uint8_t> packed, const QuantParams& q, std::size_t count) {
    q.validate();
    if (packed.size() != packed_size(count, q.bits))
        throw CorruptionError("packed code length " + std::to_string(packed.size()) + " does not hold " +
                              std::to_string(count) + " codes of " + std::to_string(q.bits) + " bits");
    std::vector<float> out(count);
    std::size_t bit = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t code = 0;
        for (int b = 0; b < q.bits; ++b, ++bit) {
            if (packed[bit / 8] & (1u << (bit % 8))) code |= 1u << b;
        }
        out[i] = dequantize_code(code, q);
    }
    return out;
}

FeatureTensor dequantize(std::span<const std::uint8_t> packed, const QuantParams& q,
                         std::span<const std::uint32_t> dims) {
    FeatureTensor t;
    t.dims.assign(dims.begin(), dims.end());
    t.meta.category = dims.size() == 1 ? Category::Fc : Category::Conv;
    t.values = dequantize(packed, q, element_count(dims));
    return t;
}

ErrorMetrics error_metrics(const FeatureTensor& original, const FeatureTensor& reconstructed) {
    if (original.dims != reconstructed.dims || original.values.size() != reconstructed.values.size())
        throw ArgumentError("error metrics need tensors of equal dims");
    ErrorMetrics m;
    if (original.values.empty()) {
        m.snr_db = std::numeric_limits<double>::infinity();
        return m;
    }
    double sq_err = 0.0;
    double sq_sig = 0.0;
    for (std::size_t i = 0; i < original.values.size(); ++i) {
        const double a = original.values[i];
        const double d = a - static_cast<double>(reconstructed.values[i]);
        m.max_abs_error = std::max(m.max_abs_error, std::abs(d));
        sq_err += d * d;
        sq_sig += a * a;
    }
    const auto n = static_cast<double>(original.values.size());
    m.mean_squared_error = sq_err / n;
    m.snr_db = m.mean_squared_error == 0.0 ? std::numeric_limits<double>::infinity()
                                           : 10.0 * std::log10((sq_sig / n) / m.mean_squared_error);
    return m;
}

}  // namespace featstream
