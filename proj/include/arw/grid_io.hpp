#pragma once

#include <filesystem>
#include <iosfwd>

#include "arw/field.hpp"

namespace arw::field {

// Binary layout, little-endian:
//   "ARWG" | u32 version=1 | u32 d | u64 n | u32 M | u64 seed | u64 trial_index | M^d f64, last axis fastest
inline constexpr std::uint32_t kGridFormatVersion = 1;

void write_grid(std::ostream& out, const FieldGrid& grid);
void write_grid(const std::filesystem::path& path, const FieldGrid& grid);

// The derivative tag is not stored; grids read back are tagged as values.
FieldGrid read_grid(std::istream& in);
FieldGrid read_grid(const std::filesystem::path& path);

}  // namespace arw::field
