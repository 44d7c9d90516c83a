#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lifshitz {

std::uint64_t fnv1a64(std::string_view text);

// Seed for the substream (root, name, index). Every random draw in the
// library goes through one of these.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

class RandomStream {
 public:
  RandomStream(std::uint64_t root, std::string_view name, std::uint64_t index)
      : engine_(substream_seed(root, name, index)) {}

  // Uniform on [0,1), 53 bits, independent of the standard library's distributions.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform on (0,1).
  double open_uniform() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }
  double normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lifshitz
