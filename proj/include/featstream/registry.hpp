#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "featstream/tensor.hpp"

namespace featstream {

/// Shape of one named feature of a reference network (224x224x3 input).
struct LayerProfile {
    std::string network;
    std::string layer;
    Category category;
    std::vector<std::uint32_t> dims;

    std::uint64_t volume_bytes() const;
};

/// VGG-16 and ResNet-50/101/152 features, in network order.
std::span<const LayerProfile> all_profiles();

std::optional<LayerProfile> lookup_profile(std::string_view network, std::string_view layer);

}  // namespace featstream
