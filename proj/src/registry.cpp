#include "featstream/registry.hpp"

#include <algorithm>

namespace featstream {

std::uint64_t LayerProfile::volume_bytes() const {
    std::uint64_t n = 4;
    for (auto d : dims) n *= d;
    return n;
}

namespace {

std::vector<LayerProfile> build_registry() {
    using enum Category;
    std::vector<LayerProfile> r = {
        {"vgg16", "conv1", Conv, {224, 224, 64}},
        {"vgg16", "pool1", Pool, {112, 112, 64}},
        {"vgg16", "conv2", Conv, {112, 112, 128}},
        {"vgg16", "pool2", Pool, {56, 56, 128}},
        {"vgg16", "conv3", Conv, {56, 56, 256}},
        {"vgg16", "pool3", Pool, {28, 28, 256}},
        {"vgg16", "conv4", Conv, {28, 28, 512}},
        {"vgg16", "pool4", Pool, {14, 14, 512}},
        {"vgg16", "conv5", Conv, {14, 14, 512}},
        {"vgg16", "pool5", Pool, {7, 7, 512}},
        {"vgg16", "fc1", Fc, {4096}},
        {"vgg16", "fc2", Fc, {4096}},
        {"vgg16", "fc3", Fc, {1000}},
    };
    // The three ResNet depths share every feature shape.
    for (const char* net : {"resnet50", "resnet101", "resnet152"}) {
        r.push_back({net, "conv1", Conv, {112, 112, 64}});
        r.push_back({net, "pool1", Pool, {56, 56, 64}});
        r.push_back({net, "conv2", Conv, {56, 56, 256}});
        r.push_back({net, "conv3", Conv, {28, 28, 512}});
        r.push_back({net, "conv4", Conv, {14, 14, 1024}});
        r.push_back({net, "conv5", Conv, {7, 7, 2048}});
        r.push_back({net, "pool5", Pool, {1, 1, 2048}});
        r.push_back({net, "fc1", Fc, {1000}});
    }
    return r;
}

}  // namespace

std::span<const LayerProfile> all_profiles() {
    static const std::vector<LayerProfile> registry = build_registry();
    return registry;
}

std::optional<LayerProfile> lookup_profile(std::string_view network, std::string_view layer) {
    auto profiles = all_profiles();
    auto it = std::find_if(profiles.begin(), profiles.end(),
                           [&](const LayerProfile& p) { return p.network == network && p.layer == layer; });
    if (it == profiles.end()) return std::nullopt;
    return *it;
}

}  // namespace featstream
