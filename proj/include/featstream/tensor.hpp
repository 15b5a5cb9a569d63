#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace featstream {

enum class Category : std::uint8_t { Conv = 0, Pool = 1, Fc = 2 };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

/// Provenance of an intermediate feature: which network and layer produced
/// it, and from which input sample.
struct FeatureMeta {
    std::string network;
    std::string layer;
    Category category = Category::Conv;
    std::string source;

    bool operator==(const FeatureMeta&) const = default;
};

/// An intermediate-layer activation volume. Values are stored row-major with
/// dims ordered (H, W, C) for conv/pool features and a single extent for fc.
struct FeatureTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
    FeatureMeta meta;

    std::size_t size() const { return values.size(); }
    std::uint64_t volume_bytes() const { return std::uint64_t{values.size()} * 4; }
};

inline constexpr std::size_t kMaxDims = 4;

/// Product of extents; throws ValidationError on zero extents, bad rank or
/// overflow of the 64-bit byte count.
std::size_t element_count(std::span<const std::uint32_t> dims);

/// Checks every FeatureTensor / FeatureMeta invariant, throwing
/// ValidationError on the first violation.
void validate(const FeatureTensor& t);

/// Rank implied by a category: 1 for FC, 3 for CONV and POOL.
std::size_t expected_rank(Category c);

/// Values and dims compared as raw bit patterns, plus metadata equality.
bool bit_equal(const FeatureTensor& a, const FeatureTensor& b);

/// "14x14x512"
std::string format_shape(std::span<const std::uint32_t> dims);
/// Inverse of format_shape; throws ArgumentError.
std::vector<std::uint32_t> parse_shape(std::string_view s);

/// Newline-separated key=value lines (network, layer, source).
std::string encode_meta_text(const FeatureMeta& m);
/// Fills network/layer/source from meta text; unknown keys are ignored.
void decode_meta_text(std::string_view text, FeatureMeta& m);

std::vector<std::uint8_t> to_f32le(std::span<const float> values);
std::vector<float> from_f32le(std::span<const std::uint8_t> bytes);

struct TensorStats {
    double nonzero_rate = 0.0;
    float min_val = 0.0f;
    float max_val = 0.0f;
    std::uint64_t nonzero_count = 0;
    std::uint64_t volume_bytes = 0;
};

TensorStats compute_stats(const FeatureTensor& t);

}  // namespace featstream
