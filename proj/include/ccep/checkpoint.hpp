#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccep/network.hpp"

namespace ccep {

// Versioned little-endian binary checkpoint (layout in docs/formats.md).
// Parameters are stored as IEEE-754 binary32, so encoding rounds each weight
// to the nearest float.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const NetworkModel& net);
NetworkModel decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const NetworkModel& net, const std::filesystem::path& path);
NetworkModel load_checkpoint(const std::filesystem::path& path);

// Rounds every parameter to binary32 precision, i.e. the network that a
// save/load round trip would produce.
NetworkModel round_to_float32(const NetworkModel& net);

}  // namespace ccep
