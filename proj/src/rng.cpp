#include "polybranch/rng.hpp"

namespace polybranch {

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}


}  // namespace polybranch
