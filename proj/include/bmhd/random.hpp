#pragma once

// Seeded random spectral fields for property checks and tests.

#include <cstdint>
#include <random>

#include "bmhd/field.hpp"
#include "bmhd/grid.hpp"

namespace bmhd {

/// Random real field with Hermitian coefficients uniform in [-1, 1]^2 on modes
/// with |k_x|, |k_y| <= kmax (kmax < 0: every mode below the Nyquist index).
/// Nyquist modes are left at zero.
inline SpectralField random_field(const GridSpec& g, std::mt19937_64& rng, int kmax = -1, bool zero_mean = true) {
  SpectralField f(g);
  const int lim = kmax < 0 ? g.n / 2 - 1 : std::min(kmax, g.n / 2 - 1);
  auto u = [&] { return 2.0 * std::ldexp(static_cast<double>(rng() >> 11), -53) - 1.0; };
  for (int kx = -lim; kx <= lim; ++kx)
    for (int ky = 0; ky <= lim; ++ky) {
      if (ky == 0 && kx < 0) continue;
      if (kx == 0 && ky == 0) {
        const double m = u();
        if (!zero_mean) f.at(0, 0) = m;
        continue;
      }
      const cplx c(u(), u());
      f.at(kx, ky) = c;
      f.at(-kx, -ky) = std::conj(c);
    }
  return f;
}

inline VectorField random_vector(const GridSpec& g, std::mt19937_64& rng, int kmax = -1, bool zero_mean = true) {
  VectorField v(g);
  for (auto& c : v) c = random_field(g, rng, kmax, zero_mean);
  return v;
}

}  // namespace bmhd
