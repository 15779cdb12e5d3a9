#pragma once

#include <string>

#include "dropkan/layer.hpp"

namespace dropkan {

/// Versioned JSON model format. Doubles are emitted with shortest
/// round-trip decimal encoding, so save/load is lossless at full f64
/// precision.
std::string network_to_json(const KanNetwork& net);
KanNetwork network_from_json(const std::string& text);

void save_network(const KanNetwork& net, const std::string& path);
KanNetwork load_network(const std::string& path);

}  // namespace dropkan
