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
#include "mcqpipe/hash.hpp"

#include <array>

namespace mcqpipe {

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stage,
                          std::string_view key) {
  std::array<char, 8> le{};
  for (int i = 0; i < 8; ++i) {
    le[static_cast<std::size_t>(i)] =
        static_cast<char>((master_seed >> (8 * i)) & 0xff);
  }
  std::uint64_t h = fnv1a64(std::string_view(le.data(), le.size()));
  h = fnv1a64(stage, h);
  h = fnv1a64(std::string_view("\x1f", 1), h);
  h = fnv1a64(key, h);
  return mix64(h);
}

}  // namespace mcqpipe
