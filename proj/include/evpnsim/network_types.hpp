#pragma once

#include <cstdint>
#include <vector>

#include "evpnsim/types.hpp"

namespace evpnsim {

enum class PacketKind : std::uint8_t { kBum, kBackground, kControl };

// Simulated frame. BUM packets carry the vni, the tree stamped at DC
// ingress, and their traversed node trail; background packets stay lean.
struct Packet {
    PacketKind kind = PacketKind::kBackground;
    StreamIdx stream = kInvalidIndex;
    std::uint64_t seq = 0;
    Vni vni = 0;
    std::uint32_t size_bytes = 0;
    NodeIdx src = kInvalidIndex;
    TreeIdx tree = kInvalidIndex;  // set when a DF forwards the packet into the DC
    std::uint16_t hop = 0;         // index into the stream's unicast route
    std::vector<NodeIdx> trail;    // diagnostic, BUM only
};

}  // namespace evpnsim
