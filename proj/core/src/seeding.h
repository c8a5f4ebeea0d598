#ifndef ROBUSTNET_SRC_SEEDING_H_
#define ROBUSTNET_SRC_SEEDING_H_

#include <cstdint>
#include <random>

namespace robustnet::internal {

// Independent stream `stream` of a base seed.
inline std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace robustnet::internal

#endif  // ROBUSTNET_SRC_SEEDING_H_
