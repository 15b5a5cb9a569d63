#include "featstream/tensor.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

#include "featstream/error.hpp"

namespace featstream {

std::string_view to_string(Category c) {
    switch (c) {
        case Category::Conv: return "conv";
        case Category::Pool: return "pool";
        case Category::Fc: return "fc";
    }
    return "unknown";
}

std::optional<Category> parse_category(std::string_view s) {
    if (s == "conv" || s == "CONV") return Category::Conv;
    if (s == "pool" || s == "POOL") return Category::Pool;
    if (s == "fc" || s == "FC") return Category::Fc;
    return std::nullopt;
}

std::size_t element_count(std::span<const std::uint32_t> dims) {
    if (dims.empty() || dims.size() > kMaxDims)
        throw ValidationError("tensor rank must be in [1, 4], got " + std::to_string(dims.size()));
    // Byte count (n * 4) must fit in u64 and n in size_t.
    constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 4;
    std::uint64_t n = 1;
    for (auto d : dims) {
        if (d == 0) throw ValidationError("tensor extents must be positive");
        if (n > limit / d) throw ValidationError("tensor element count overflows");
        n *= d;
    }
    if (n > std::numeric_limits<std::size_t>::max()) throw ValidationError("tensor too large");
    return static_cast<std::size_t>(n);
}

std::size_t expected_rank(Category c) { return c == Category::Fc ? 1 : 3; }

void validate(const FeatureTensor& t) {
    const auto n = element_count(t.dims);
    if (t.values.size() != n)
        throw ValidationError("value count " + std::to_string(t.values.size()) +
                              " does not match dims product " + std::to_string(n));
    if (t.dims.size() != expected_rank(t.meta.category))
        throw ValidationError(std::string(to_string(t.meta.category)) + " feature requires rank " +
                              std::to_string(expected_rank(t.meta.category)) + ", got " +
                              std::to_string(t.dims.size()));
    for (const auto* field : {&t.meta.network, &t.meta.layer, &t.meta.source}) {
        if (field->find('\n') != std::string::npos)
            throw ValidationError("metadata fields may not contain newlines");
    }
    auto bad = std::find_if(t.values.begin(), t.values.end(), [](float v) { return !std::isfinite(v); });
    if (bad != t.values.end())
        throw ValidationError("non-finite value at element " + std::to_string(bad - t.values.begin()));
}

bool bit_equal(const FeatureTensor& a, const FeatureTensor& b) {
    if (a.dims != b.dims || a.meta != b.meta || a.values.size() != b.values.size()) return false;
    return a.values.empty() ||
           std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) == 0;
}

std::string format_shape(std::span<const std::uint32_t> dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(dims[i]);
    }
    return s;
}

std::vector<std::uint32_t> parse_shape(std::string_view s) {
    std::vector<std::uint32_t> dims;
    while (true) {
        auto sep = s.find_first_of("xX");
        auto tok = s.substr(0, sep);
        std::uint32_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size() || v == 0)
            throw ArgumentError("bad shape '" + std::string(s) + "'");
        dims.push_back(v);
        if (sep == std::string_view::npos) break;
        s.remove_prefix(sep + 1);
    }
    if (dims.size() > kMaxDims) throw ArgumentError("shape has more than 4 extents");
    return dims;
}

std::string encode_meta_text(const FeatureMeta& m) {
    std::string s;
    s += "network=" + m.network + "\n";
    s += "layer=" + m.layer + "\n";
    s += "source=" + m.source + "\n";
    return s;
}

void decode_meta_text(std::string_view text, FeatureMeta& m) {
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        auto eq = line.find('=');
        if (eq == std::string_view::npos) continue;
        auto key = line.substr(0, eq);
        auto value = std::string(line.substr(eq + 1));
        if (key == "network") m.network = value;
        else if (key == "layer") m.layer = value;
        else if (key == "source") m.source = value;
    }
}

std::vector<std::uint8_t> to_f32le(std::span<const float> values) {
    std::vector<std::uint8_t> out(values.size() * 4);
    if constexpr (std::endian::native == std::endian::little) {
        if (!values.empty()) std::memcpy(out.data(), values.data(), out.size());
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            auto u = std::bit_cast<std::uint32_t>(values[i]);
            for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<std::uint8_t>(u >> (8 * b));
        }
    }
    return out;
}

std::vector<float> from_f32le(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 4 != 0) throw CorruptionError("f32 payload length is not a multiple of 4");
    std::vector<float> out(bytes.size() / 4);
    if constexpr (std::endian::native == std::endian::little) {
        if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            std::uint32_t u = 0;
            for (int b = 0; b < 4; ++b) u |= std::uint32_t{bytes[4 * i + b]} << (8 * b);
            out[i] = std::bit_cast<float>(u);
        }
    }
    return out;
}

TensorStats compute_stats(const FeatureTensor& t) {
    TensorStats s;
    s.volume_bytes = t.volume_bytes();
    if (t.values.empty()) return s;
    auto [lo, hi] = std::minmax_element(t.values.begin(), t.values.end());
    s.min_val = *lo;
    s.max_val = *hi;
    s.nonzero_count = static_cast<std::uint64_t>(
        std::count_if(t.values.begin(), t.values.end(), [](float v) { return v != 0.0f; }));
    s.nonzero_rate = static_cast<double>(s.nonzero_count) / static_cast<double>(t.values.size());
    return s;
}

}  // namespace featstream
