#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "featstream/tensor.hpp"

namespace featstream {

/// |N(0, sigma)|, the value range of a ReLU output.
struct ReluGaussian {
    double sigma = 1.0;
};

struct UniformValues {
    double lo = 0.0;
    double hi = 1.0;
};

using ValueDistribution = std::variant<ReluGaussian, UniformValues>;

/// round(rate * n) with halves rounded away from zero.
std::size_t synthetic_nonzero_count(std::size_t n, double nonzero_rate);

/// Sparse feature with exactly synthetic_nonzero_count(n, rate) nonzero
/// elements at positions picked by a seeded shuffle. Output is a pure function
/// of the arguments. Category defaults to FC for rank 1 and CONV for rank 3.
FeatureTensor generate_synthetic(std::span<const std::uint32_t> dims, double nonzero_rate,
                                 const ValueDistribution& dist, std::uint64_t seed,
                                 std::optional<Category> category = std::nullopt);

}  // namespace featstream
