#pragma once

// Binary checkpoints: "BMHD1", then little-endian u32 d, u32 n, f64 L, f64 t,
// u32 field_count and per field a u32-length-prefixed ASCII name followed by
// n^d f64 physical samples in row-major order.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "bmhd/error.hpp"
#include "bmhd/field.hpp"
#include "bmhd/grid.hpp"
#include "bmhd/mhd.hpp"
#include "bmhd/spectral.hpp"

namespace bmhd {

struct Checkpoint {
  GridSpec grid;
  double t = 0.0;
  std::vector<std::pair<std::string, RealArray>> fields;

  const RealArray& field(const std::string& name) const {
    for (const auto& [k, v] : fields)
      if (k == name) return v;
    throw IoError("checkpoint: missing field '" + name + "'");
  }
};

namespace detail {

inline constexpr std::array<char, 5> kCheckpointMagic = {'B', 'M', 'H', 'D', '1'};

template <class T>
void put_le(std::ostream& os, T v) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is, const std::string& path) {
  std::array<unsigned char, sizeof(T)> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), sizeof(T))) throw IoError("checkpoint " + path + ": truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

}  // namespace detail

inline void checkpoint_write(const Checkpoint& ck, const std::string& path) {
  const std::size_t npts = ck.grid.size();
  for (const auto& [name, v] : ck.fields)
    if (v.size() != npts) throw InvalidArgument("checkpoint_write: field '" + name + "' has the wrong size");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(detail::kCheckpointMagic.data(), detail::kCheckpointMagic.size());
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ck.grid.d));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ck.grid.n));
  detail::put_le<double>(os, ck.grid.period);
  detail::put_le<double>(os, ck.t);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ck.fields.size()));
  for (const auto& [name, v] : ck.fields) {
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (double x : v) detail::put_le<double>(os, x);
  }
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

/// Reads a checkpoint; the grid's dealias fraction is not stored and keeps its default.
inline Checkpoint checkpoint_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::array<char, 5> magic{};
  if (!is.read(magic.data(), magic.size())) throw IoError("checkpoint " + path + ": truncated file");
  if (magic != detail::kCheckpointMagic) throw IoError("checkpoint " + path + ": bad magic");
  Checkpoint ck;
  const auto d = detail::get_le<std::uint32_t>(is, path);
  const auto n = detail::get_le<std::uint32_t>(is, path);
  ck.grid.period = detail::get_le<double>(is, path);
  ck.t = detail::get_le<double>(is, path);
  if (d < 1 || d > 3 || n < 8 || n > (1u << 16) || (n & (n - 1)) != 0 || !(ck.grid.period > 0.0))
    throw IoError("checkpoint " + path + ": invalid dimensions");
  ck.grid.d = static_cast<int>(d);
  ck.grid.n = static_cast<int>(n);
  const auto count = detail::get_le<std::uint32_t>(is, path);
  if (count > 1024) throw IoError("checkpoint " + path + ": implausible field count");
  const std::size_t npts = ck.grid.size();
  for (std::uint32_t f = 0; f < count; ++f) {
    const auto len = detail::get_le<std::uint32_t>(is, path);
    if (len > 4096) throw IoError("checkpoint " + path + ": implausible name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw IoError("checkpoint " + path + ": truncated file");
    RealArray v(npts);
    for (double& x : v) x = detail::get_le<double>(is, path);
    ck.fields.emplace_back(std::move(name), std::move(v));
  }
  return ck;
}

inline const char* const kStateFieldNames[] = {"a", "u_x", "u_y", "b_x", "b_y", "U_x", "U_y", "B_x", "B_y"};

/// Both solutions of a paired run as one checkpoint.
inline Checkpoint make_checkpoint(const CompressibleState& comp, const IncompressibleState& inc) {
  Checkpoint ck;
  ck.grid = comp.grid();
  ck.t = comp.t;
  const SpectralField* src[] = {&comp.a, &comp.u[0], &comp.u[1], &comp.b[0], &comp.b[1],
                                &inc.U[0], &inc.U[1], &inc.B[0], &inc.B[1]};
  for (int i = 0; i < 9; ++i) ck.fields.emplace_back(kStateFieldNames[i], transform_inverse(*src[i]));
  return ck;
}

/// Inverse of make_checkpoint on the grid `g` (which supplies the dealias fraction).
inline std::pair<CompressibleState, IncompressibleState> states_from_checkpoint(const Checkpoint& ck,
                                                                                const GridSpec& g) {
  if (ck.grid.d != g.d || ck.grid.n != g.n || ck.grid.period != g.period)
    throw IoError("checkpoint: dimension mismatch with the configured grid");
  auto f = [&](const char* name) { return transform_forward(ck.field(name), g); };
  CompressibleState comp{f("a"), VectorField({f("u_x"), f("u_y")}), VectorField({f("b_x"), f("b_y")}), ck.t};
  IncompressibleState inc{VectorField({f("U_x"), f("U_y")}), VectorField({f("B_x"), f("B_y")}), ck.t};
  return {std::move(comp), std::move(inc)};
}

}  // namespace bmhd
