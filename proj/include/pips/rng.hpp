#pragma once

#include <cstdint>
#include <random>

namespace pips {

using Rng = std::mt19937_64;

// Stream-splitting rule: stream `s` of master seed `m` is an mt19937_64 seeded
// through std::seed_seq{lo(m), hi(m), lo(s), hi(s), tag}. Streams with a
// different `tag` (datasets, chains, fictitious inputs, ...) never coincide
// for the same (m, s).
enum class StreamTag : std::uint32_t {
  kDataset = 1,
  kChain = 2,
  kFictitious = 3,
  kEmulator = 4,
  kTest = 99,
};

inline Rng make_stream(std::uint64_t master, std::uint64_t stream,
                       StreamTag tag = StreamTag::kChain) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag)};
  return Rng(seq);
}

// Derived 64-bit seed, for APIs that take a seed rather than an engine.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 StreamTag tag) {
  Rng rng = make_stream(master, stream, tag);
  return rng();
}

}  // namespace pips
