// Copyright 2026 The wwb Authors.
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

#ifndef WWB_CTNS_HPP_
#define WWB_CTNS_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wwb {

// CTNS: a minimal binary tensor container for bit-exact fixtures.
// Layout (all little-endian):
//   magic "CTNS" | version u16 | dtype u8 (0=f32, 1=f64) | rank u8 |
//   dims u64 x rank | row-major payload (IEEE-754).
// Complex tensors use a two-plane convention: an extra dimension of
// extent 2 holding the real and imaginary planes.
struct CtnsTensor {
  std::uint8_t dtype = 1;  // f64 by default
  std::vector<std::uint64_t> dims;
  std::vector<double> data;  // held as doubles regardless of on-disk dtype

  std::uint64_t num_elements() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
};

inline constexpr std::uint16_t kCtnsVersion = 1;

void write_ctns(std::ostream& os, const CtnsTensor& t);
void write_ctns(const std::string& path, const CtnsTensor& t);
CtnsTensor read_ctns(std::istream& is);
CtnsTensor read_ctns(const std::string& path);

}  // namespace wwb

#endif  // WWB_CTNS_HPP_
