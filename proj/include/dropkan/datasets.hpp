#pragma once

#include <cstdint>
#include <string>

namespace dropkan {

/// Car evaluation dataset (1728 rows, 6 ordinal features, 4 classes),
/// regenerated from a hierarchical decision model over price, technical
/// characteristics, comfort and safety. Deterministic: the full attribute
/// grid is emitted in lexicographic order.
std::string car_dataset_csv();

/// Two gaussian blobs in 2D: n points, classes 0/1 centered at
/// (-0.5,-0.5) and (0.5,0.5) with stddev 0.15. Points are emitted
/// class-interleaved; fully determined by the seed.
std::string blobs_dataset_csv(std::size_t n, std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace dropkan
