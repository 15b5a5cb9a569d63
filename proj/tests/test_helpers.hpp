#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "featstream/synthetic.hpp"
#include "featstream/tensor.hpp"

namespace fstest {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "featstream-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline featstream::FeatureTensor small_tensor(std::uint64_t seed, double rate = 0.3) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> dims;
    if (rng() % 2)
        dims = {static_cast<std::uint32_t>(1 + rng() % 3000)};
    else
        dims = {static_cast<std::uint32_t>(1 + rng() % 12), static_cast<std::uint32_t>(1 + rng() % 12),
                static_cast<std::uint32_t>(1 + rng() % 64)};
    auto t = featstream::generate_synthetic(dims, rate, featstream::ReluGaussian{2.0}, seed);
    t.meta.network = "vgg16";
    t.meta.layer = "conv" + std::to_string(seed % 5);
    t.meta.source = "img" + std::to_string(seed) + ".jpg";
    return t;
}

inline bool have_tool(const std::string& name) {
    return std::system(("command -v " + name + " >/dev/null 2>&1").c_str()) == 0;
}

}  // namespace fstest
