#pragma once

#include <cstdint>
#include <random>

namespace subnewton {

using Rng = std::mt19937_64;

// Independent stream for (seed, stream, substream); outer iterations and
// solver components each draw from their own stream so results do not depend
// on call order elsewhere.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream), 0x5u};
  return Rng(seq);
}

}  // namespace subnewton
