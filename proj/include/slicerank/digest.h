// Copyright 2026 The SliceRank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLICERANK_DIGEST_H_
#define SLICERANK_DIGEST_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace slicerank {

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

// 64-bit FNV-1a. Used for seeded, platform-independent hashing of tokens
// and identifiers; not for content addressing.
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0);

// One step of the splitmix64 generator; a stable bit mixer.
uint64_t SplitMix64(uint64_t& state);

// Uniform double in [0, 1) from the top 53 bits of `bits`.
inline double UnitFromBits(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace slicerank

#endif  // SLICERANK_DIGEST_H_
