#include "featstream/synthetic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "featstream/error.hpp"

namespace featstream {

namespace {

// std::mt19937_64's output sequence is fixed by the standard; the library
// distributions are not, so the samplers below are written out.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    // Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double gaussian() {
        const double u1 = 1.0 - unit();  // (0, 1]
        const double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

float draw_nonzero(Sampler& rng, const ValueDistribution& dist) {
    while (true) {
        float v = std::visit(
            [&](const auto& d) -> float {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, ReluGaussian>) {
                    return static_cast<float>(std::abs(rng.gaussian()) * d.sigma);
                } else {
                    return static_cast<float>(d.lo + (d.hi - d.lo) * rng.unit());
                }
            },
            dist);
        if (v != 0.0f && std::isfinite(v)) return v;
    }
}

void check_distribution(const ValueDistribution& dist) {
    if (auto* g = std::get_if<ReluGaussian>(&dist)) {
        if (!(g->sigma > 0.0) || !std::isfinite(g->sigma)) throw ArgumentError("sigma must be positive and finite");
    } else {
        const auto& u = std::get<UniformValues>(dist);
        if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || !(u.lo < u.hi))
            throw ArgumentError("uniform range requires finite lo < hi");
    }
}

}  // namespace

std::size_t synthetic_nonzero_count(std::size_t n, double nonzero_rate) {
    if (!(nonzero_rate >= 0.0 && nonzero_rate <= 1.0))
        throw ArgumentError("nonzero rate must lie in [0, 1]");
    auto k = static_cast<std::size_t>(std::llround(nonzero_rate * static_cast<double>(n)));
    return std::min(k, n);
}

FeatureTensor generate_synthetic(std::span<const std::uint32_t> dims, double nonzero_rate,
                                 const ValueDistribution& dist, std::uint64_t seed,
                                 std::optional<Category> category) {
    check_distribution(dist);
    FeatureTensor t;
    t.dims.assign(dims.begin(), dims.end());
    const auto n = element_count(t.dims);
    if (n > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("synthetic tensor too large");
    const auto k = synthetic_nonzero_count(n, nonzero_rate);

    if (category) {
        t.meta.category = *category;
    } else if (dims.size() == 1) {
        t.meta.category = Category::Fc;
    } else if (dims.size() == 3) {
        t.meta.category = Category::Conv;
    } else {
        throw ArgumentError("synthetic features must have rank 1 (fc) or 3 (conv/pool)");
    }
    if (dims.size() != expected_rank(t.meta.category))
        throw ArgumentError("rank does not match category " + std::string(to_string(t.meta.category)));

    t.values.assign(n, 0.0f);
    Sampler rng(seed);
    // Partial Fisher-Yates: the first k slots of `order` are the chosen positions.
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
        t.values[order[i]] = draw_nonzero(rng, dist);
    }
    return t;
}

}  // namespace featstream
