#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace evpnsim {

// Virtual time in seconds.
using SimTime = double;

using NodeIdx = std::uint32_t;
using LinkIdx = std::uint32_t;
using TreeIdx = std::uint32_t;
using StreamIdx = std::uint32_t;
using Vni = std::uint32_t;

inline constexpr std::uint32_t kInvalidIndex = std::numeric_limits<std::uint32_t>::max();

// Thrown for configuration and contract violations; the message names the
// offending field or entity.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evpnsim
