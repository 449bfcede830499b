#include "droc/rng.hpp"

#include <bit>
#include <vector>

namespace droc {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::stream(std::uint64_t root, std::initializer_list<std::uint64_t> ids) {
  std::vector<std::uint32_t> words;
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(root);
  for (std::uint64_t id : ids) push(id);
  std::seed_seq seq(words.begin(), words.end());
  std::uint64_t seed = 0;
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  seed = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  return Rng(seed);
}

double Rng::uniform() {
  const double u = uniform_(engine_);
  mix(u);
  return u;
}

double Rng::normal() {
  const double z = normal_(engine_);
  mix(z);
  return z;
}

void Rng::mix(double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    hash_ ^= (bits >> (8 * i)) & 0xffU;
    hash_ *= 1099511628211ULL;
  }
}

}  // namespace droc
