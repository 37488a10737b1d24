#include "arw/grid_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "arw/errors.hpp"

namespace arw::field {
namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw IoError("truncated grid file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_grid(std::ostream& out, const FieldGrid& grid) {
  out.write("ARWG", 4);
  put_le<std::uint32_t>(out, kGridFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.d));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(grid.n));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.M));
  put_le<std::uint64_t>(out, grid.seed);
  put_le<std::uint64_t>(out, grid.trial_index);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
  } else {
    for (double v : grid.values) put_le<double>(out, v);
  }
  if (!out) throw IoError("failed to write grid");
}

void write_grid(const std::filesystem::path& path, const FieldGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_grid(out, grid);
}

FieldGrid read_grid(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "ARWG", 4) != 0) throw IoError("not an ARWG grid file");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kGridFormatVersion) throw IoError("unsupported grid version " + std::to_string(version));
  FieldGrid grid;
  grid.d = static_cast<int>(get_le<std::uint32_t>(in));
  grid.n = static_cast<std::int64_t>(get_le<std::uint64_t>(in));
  grid.M = static_cast<int>(get_le<std::uint32_t>(in));
  grid.seed = get_le<std::uint64_t>(in);
  grid.trial_index = get_le<std::uint64_t>(in);
  if (grid.d < 1 || grid.d > 8 || grid.M < 1) throw IoError("corrupt grid header");
  std::size_t count = 1;
  for (int i = 0; i < grid.d; ++i) count *= static_cast<std::size_t>(grid.M);
  if (count * sizeof(double) > memory_budget_bytes()) throw MemoryBudgetExceeded("grid file exceeds the memory budget");
  grid.values.resize(count);
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(grid.values.data()), static_cast<std::streamsize>(count * sizeof(double)))) {
      throw IoError("truncated grid data");
    }
  } else {
    for (auto& v : grid.values) v = get_le<double>(in);
  }
  for (double v : grid.values) {
    if (!std::isfinite(v)) throw IoError("grid contains non-finite values");
  }
  return grid;
}

FieldGrid read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_grid(in);
}

}  // namespace arw::field
