#include "lifshitz/rng.hpp"

#include <cmath>
#include <numbers>

namespace lifshitz {

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index) {
  std::uint64_t state = root;
  std::uint64_t a = splitmix64(state);
  state ^= fnv1a64(name);
  std::uint64_t b = splitmix64(state);
  state ^= index * 0xd1b54a32d192ed03ULL;
  std::uint64_t c = splitmix64(state);
  return a ^ (b << 1) ^ (c << 2) ^ splitmix64(state);
}

double RandomStream::normal() {
  // Box-Muller, one value per call.
  double u1 = open_uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lifshitz
