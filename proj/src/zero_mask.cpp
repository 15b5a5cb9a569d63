#include "featstream/zero_mask.hpp"

#include <bit>
#include <cstring>

#include "featstream/error.hpp"

namespace featstream {

ZeroMaskParts zero_mask_encode(std::span<const float> values) {
    ZeroMaskParts parts;
    parts.mask.assign((values.size() + 7) / 8, 0);
    std::vector<float> kept;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::bit_cast<std::uint32_t>(values[i]) != 0) {
            parts.mask[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
            kept.push_back(values[i]);
        }
    }
    parts.nonzeros = to_f32le(kept);
    return parts;
}

ZeroMaskParts zero_mask_encode(const FeatureTensor& t) { return zero_mask_encode(t.values); }

std::vector<float> zero_mask_decode(std::span<const std::uint8_t> mask, std::span<const std::uint8_t> nonzeros,
                                    std::size_t count) {
    if (mask.size() < (count + 7) / 8) throw CorruptionError("zero mask shorter than element count");
    std::size_t ones = 0;
    for (std::size_t b = 0; b < mask.size(); ++b) {
        std::uint8_t byte = mask[b];
        // Bits at or past `count` are padding and must be clear.
        if (8 * b + 8 > count) {
            const std::size_t valid = count > 8 * b ? count - 8 * b : 0;
            if (valid < 8 && (byte >> valid) != 0) throw CorruptionError("zero mask padding bits set");
        }
        ones += static_cast<std::size_t>(std::popcount(byte));
    }
    if (ones * 4 != nonzeros.size())
        throw CorruptionError("zero mask popcount " + std::to_string(ones) + " disagrees with " +
                              std::to_string(nonzeros.size()) + " value bytes");

    const auto kept = from_f32le(nonzeros);
    std::vector<float> values(count, 0.0f);
    std::size_t next = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (mask[i / 8] & (1u << (i % 8))) values[i] = kept[next++];
    }
    return values;
}

FeatureTensor zero_mask_decode(std::span<const std::uint8_t> mask, std::span<const std::uint8_t> nonzeros,
                               std::span<const std::uint32_t> dims) {
    FeatureTensor t;
    t.dims.assign(dims.begin(), dims.end());
    t.meta.category = dims.size() == 1 ? Category::Fc : Category::Conv;
    t.values = zero_mask_decode(mask, nonzeros, element_count(dims));
    return t;
}

}  // namespace featstream
