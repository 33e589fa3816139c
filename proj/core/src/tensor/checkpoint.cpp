// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/tensor/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace amem::tc {
namespace {

constexpr std::array<char, 4> kMagic = {'A', 'M', 'E', 'M'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                 static_cast<char>((v >> 16) & 0xFF),
                                 static_cast<char>((v >> 24) & 0xFF)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw CheckpointError("truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_checkpoint(std::ostream& os, const std::vector<CheckpointEntry>& entries) {
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    std::size_t n = 1;
    for (auto d : e.dims) n *= d;
    if (n != e.values.size()) throw CheckpointError("entry '" + e.name + "' dims disagree with values");
    put_u32(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_u32(os, static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims) put_u32(os, d);
    for (float v : e.values) put_u32(os, std::bit_cast<std::uint32_t>(v));
  }
  if (!os) throw CheckpointError("failed writing checkpoint");
}

std::vector<CheckpointEntry> read_checkpoint(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kMagic) throw CheckpointError("bad checkpoint magic");
  const std::uint32_t version = get_u32(is);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(is);
  std::vector<CheckpointEntry> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    const std::uint32_t len = get_u32(is);
    if (len > (1u << 16)) throw CheckpointError("implausible name length");
    e.name.resize(len);
    if (!is.read(e.name.data(), len)) throw CheckpointError("truncated checkpoint");
    const std::uint32_t rank = get_u32(is);
    if (rank > 8) throw CheckpointError("implausible rank for '" + e.name + "'");
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      e.dims.push_back(get_u32(is));
      n *= e.dims.back();
    }
    if (n > (std::size_t{1} << 28)) throw CheckpointError("implausible size for '" + e.name + "'");
    e.values.resize(n);
    for (auto& v : e.values) v = std::bit_cast<float>(get_u32(is));
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointEntry>& entries) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot open '" + tmp + "' for writing");
    write_checkpoint(os, entries);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CheckpointEntry> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(is);
}

template <typename T>
std::vector<CheckpointEntry> to_entries(const ParamSet<T>& params, const std::string& prefix) {
  std::vector<CheckpointEntry> out;
  for (const auto& p : params) {
    CheckpointEntry e;
    e.name = prefix + p.name;
    for (auto d : p.tensor.shape()) e.dims.push_back(static_cast<std::uint32_t>(d));
    e.values.assign(p.tensor.data().begin(), p.tensor.data().end());
    out.push_back(std::move(e));
  }
  return out;
}

const CheckpointEntry* find_entry(const std::vector<CheckpointEntry>& entries, const std::string& name) {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

template <typename T>
void assign_from_entries(ParamSet<T>& params, const std::vector<CheckpointEntry>& entries,
                         const std::string& prefix) {
  for (auto& p : params) {
    const auto* e = find_entry(entries, prefix + p.name);
    if (!e) throw CheckpointError("checkpoint lacks parameter '" + prefix + p.name + "'");
    Shape shape(e->dims.begin(), e->dims.end());
    if (shape != p.tensor.shape()) {
      throw CheckpointError("parameter '" + p.name + "' has shape " + shape_str(p.tensor.shape()) +
                            " but checkpoint holds " + shape_str(shape));
    }
    auto dst = p.tensor.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(e->values[i]);
  }
}

template std::vector<CheckpointEntry> to_entries(const ParamSet<float>&, const std::string&);
template std::vector<CheckpointEntry> to_entries(const ParamSet<double>&, const std::string&);
template void assign_from_entries(ParamSet<float>&, const std::vector<CheckpointEntry>&, const std::string&);
template void assign_from_entries(ParamSet<double>&, const std::vector<CheckpointEntry>&, const std::string&);

}  // namespace amem::tc
