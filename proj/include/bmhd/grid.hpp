#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "bmhd/error.hpp"

namespace bmhd {

/// Uniform periodic grid on [0, period)^d with n points per axis.
struct GridSpec {
  int d = 2;
  int n = 64;
  double period = 2.0 * std::numbers::pi;
  double dealias_fraction = 2.0 / 3.0;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const {
    if (d < 1 || d > 3) throw InvalidArgument("grid: d must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0) throw InvalidArgument("grid: n must be a power of two >= 8");
    if (!(period > 0.0)) throw InvalidArgument("grid: period must be > 0");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
      throw InvalidArgument("grid: dealias_fraction must lie in (0, 1]");
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
    return s;
  }

  double dx() const { return period / n; }
  double volume() const { return std::pow(period, d); }
  /// Physical wavenumber of one unit of the integer wavevector.
  double k0() const { return 2.0 * std::numbers::pi / period; }

  /// Integer wavenumber of FFT index i, in (-n/2, n/2].
  int wavenumber(int i) const { return i <= n / 2 ? i : i - n; }
  /// FFT index of integer wavenumber k (any integer, reduced mod n).
  int index_of(int k) const { return ((k % n) + n) % n; }

  bool operator==(const GridSpec& o) const {
    return d == o.d && n == o.n && period == o.period && dealias_fraction == o.dealias_fraction;
  }
};

}  // namespace bmhd
