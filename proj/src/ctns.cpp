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

#include "wwb/ctns.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wwb {

static_assert(std::endian::native == std::endian::little,
              "CTNS I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("ctns: truncated stream");
  return v;
}

}  // namespace

void write_ctns(std::ostream& os, const CtnsTensor& t) {
  if (t.dtype > 1) throw std::runtime_error("ctns: unknown dtype code");
  if (t.data.size() != t.num_elements())
    throw std::runtime_error("ctns: data size does not match dims");
  os.write("CTNS", 4);
  put<std::uint16_t>(os, kCtnsVersion);
  put<std::uint8_t>(os, t.dtype);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) put<std::uint64_t>(os, d);
  if (t.dtype == 1) {
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  } else {
    for (double v : t.data) put<float>(os, static_cast<float>(v));
  }
  if (!os) throw std::runtime_error("ctns: write failed");
}

void write_ctns(const std::string& path, const CtnsTensor& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("ctns: cannot open for write: " + path);
  write_ctns(f, t);
}

CtnsTensor read_ctns(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "CTNS", 4) != 0)
    throw std::runtime_error("ctns: bad magic");
  const auto version = get<std::uint16_t>(is);
  if (version != kCtnsVersion)
    throw std::runtime_error("ctns: unsupported version " +
                             std::to_string(version));
  CtnsTensor t;
  t.dtype = get<std::uint8_t>(is);
  if (t.dtype > 1) throw std::runtime_error("ctns: unknown dtype code");
  const auto rank = get<std::uint8_t>(is);
  t.dims.resize(rank);
  for (auto& d : t.dims) d = get<std::uint64_t>(is);
  const std::uint64_t n = t.num_elements();
  t.data.resize(n);
  if (t.dtype == 1) {
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("ctns: truncated payload");
  } else {
    for (auto& v : t.data) v = get<float>(is);
  }
  return t;
}

CtnsTensor read_ctns(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("ctns: cannot open for read: " + path);
  return read_ctns(f);
}

}  // namespace wwb
