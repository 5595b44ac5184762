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

#ifndef WWB_FFT_HPP_
#define WWB_FFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

namespace wwb {

// In-place DFT. Radix-2 when the length is a power of two, direct O(n^2)
// otherwise (only small filter lengths hit the slow path).
// The inverse transform includes the 1/n factor.
void fft(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

}  // namespace wwb

#endif  // WWB_FFT_HPP_
