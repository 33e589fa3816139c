// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "amem/tensor/params.hpp"

namespace amem::tc {

// Binary layout, all integers little-endian:
//   "AMEM" | u32 version | u32 count | count x {
//     u32 name_len | name bytes (UTF-8) | u32 rank | rank x u32 dim | f32 values }
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

void write_checkpoint(std::ostream& os, const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> load_checkpoint(const std::filesystem::path& path);

template <typename T>
std::vector<CheckpointEntry> to_entries(const ParamSet<T>& params, const std::string& prefix = "");

// Copies values into existing parameters by name. Every parameter must be
// present with the same shape; entries with other prefixes are ignored.
template <typename T>
void assign_from_entries(ParamSet<T>& params, const std::vector<CheckpointEntry>& entries,
                         const std::string& prefix = "");

const CheckpointEntry* find_entry(const std::vector<CheckpointEntry>& entries, const std::string& name);

}  // namespace amem::tc
