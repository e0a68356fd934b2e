/* Copyright 2026 The mcqpipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef MCQPIPE_HASH_HPP_
#define MCQPIPE_HASH_HPP_

#include <cstdint>
#include <string_view>

namespace mcqpipe {

// Stable 64-bit FNV-1a. Used for all seed derivation so that runs are
// reproducible across platforms and standard libraries (std::hash is not).
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 finalizer; decorrelates structured inputs before seeding an RNG.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for one (stage, key) pair under a master seed. The derivation is the
// documented reproducibility contract: FNV-1a over the little-endian master
// seed bytes, the stage name, a 0x1f separator, and the key, then splitmix64.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stage,
                          std::string_view key);

}  // namespace mcqpipe

#endif  // MCQPIPE_HASH_HPP_
