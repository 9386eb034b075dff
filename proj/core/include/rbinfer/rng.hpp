// Copyright 2026 The rbinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace rbinfer {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive well-mixed child seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based seed split: child streams are independent for distinct
/// (lane, index) pairs and reproducible from the master seed alone.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t lane,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ (0xa076'1d64'78bd'642full * (lane + 1))) + index);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t lane, std::uint64_t index = 0) {
  return Rng(derive_seed(master, lane, index));
}

}  // namespace rbinfer
