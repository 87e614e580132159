#pragma once

// Transforms, spectral differential operators, projectors and dealiasing on
// the periodic grid. Everything here is a pure function of its inputs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "bmhd/error.hpp"
#include "bmhd/fft.hpp"
#include "bmhd/field.hpp"
#include "bmhd/grid.hpp"

namespace bmhd {

/// Calls fn(flat_index, kx, ky) for every mode of a 2D grid.
template <class Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
  const int n = g.n;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    const int kx = g.wavenumber(i);
    for (int j = 0; j < n; ++j, ++idx) fn(idx, kx, g.wavenumber(j));
  }
}

/// Wavenumber used by first-derivative symbols: the Nyquist component is dropped
/// so that odd operators keep real fields real.
inline int derivative_wavenumber(const GridSpec& g, int k) { return k == g.n / 2 ? 0 : k; }

namespace detail {
inline void require_2d(const GridSpec& g, const char* what) {
  if (g.d != 2) throw InvalidArgument(std::string(what) + ": only d = 2 is supported");
}
}  // namespace detail

/// Physical samples (row-major, axis 0 slowest) -> coefficients with zero mode = mean.
inline SpectralField transform_forward(std::span<const double> samples, const GridSpec& grid) {
  grid.validate();
  detail::require_2d(grid, "transform_forward");
  if (samples.size() != grid.size()) throw InvalidArgument("transform_forward: sample count does not match grid");
  const int n = grid.n;
  std::vector<cplx> in(samples.begin(), samples.end()), out(samples.size());
  fft::forward_2d(n, in.data(), out.data());
  const double scale = 1.0 / static_cast<double>(samples.size());
  SpectralField f(grid);
  // Symmetrize so that Hermitian symmetry holds exactly rather than to rounding.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t a = static_cast<std::size_t>(i) * n + j;
      const std::size_t b = static_cast<std::size_t>((n - i) % n) * n + (n - j) % n;
      f[a] = 0.5 * scale * (out[a] + std::conj(out[b]));
    }
  }
  return f;
}

/// Coefficients -> real physical samples. Throws if the imaginary residue exceeds 1e-10.
inline RealArray transform_inverse(const SpectralField& f) {
  const GridSpec& grid = f.grid();
  detail::require_2d(grid, "transform_inverse");
  std::vector<cplx> out(f.size());
  fft::backward_2d(grid.n, f.coeffs().data(), out.data());
  RealArray r(out.size());
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    r[i] = out[i].real();
    max_re = std::max(max_re, std::abs(out[i].real()));
    max_im = std::max(max_im, std::abs(out[i].imag()));
  }
  if (max_im > 1e-10 * std::max(1.0, max_re))
    throw InvalidArgument("transform_inverse: coefficients are not Hermitian (imaginary residue " +
                          std::to_string(max_im) + ")");
  return r;
}

inline std::vector<RealArray> transform_inverse(const VectorField& v) {
  std::vector<RealArray> out;
  out.reserve(v.dim());
  for (const auto& c : v) out.push_back(transform_inverse(c));
  return out;
}

/// Multiplies coefficient k by i * 2*pi*k_axis / L; the Nyquist component is zeroed.
inline SpectralField derivative(const SpectralField& f, int axis) {
  const GridSpec& g = f.grid();
  detail::require_2d(g, "derivative");
  if (axis < 0 || axis >= g.d) throw InvalidArgument("derivative: axis out of range");
  SpectralField out(g);
  const double k0 = g.k0();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky) {
    const int k = derivative_wavenumber(g, axis == 0 ? kx : ky);
    out[idx] = cplx(0.0, k0 * k) * f[idx];
  });
  return out;
}

inline VectorField gradient(const SpectralField& f) {
  std::vector<SpectralField> c;
  for (int a = 0; a < f.grid().d; ++a) c.push_back(derivative(f, a));
  return VectorField(std::move(c));
}

inline SpectralField divergence(const VectorField& v) {
  SpectralField out = derivative(v[0], 0);
  for (int a = 1; a < v.dim(); ++a) out += derivative(v[a], a);
  return out;
}

namespace detail {
/// Squared derivative wavevector |k_eff|^2 in physical units.
inline double k2_eff(const GridSpec& g, int kx, int ky) {
  const double k0 = g.k0();
  const double x = k0 * derivative_wavenumber(g, kx), y = k0 * derivative_wavenumber(g, ky);
  return x * x + y * y;
}
}  // namespace detail

/// Symbol -|k|^2, consistent with divergence(gradient(f)).
inline SpectralField laplacian(const SpectralField& f) {
  SpectralField out(f.grid());
  for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky) { out[idx] = -detail::k2_eff(f.grid(), kx, ky) * f[idx]; });
  return out;
}

inline VectorField laplacian(const VectorField& v) {
  std::vector<SpectralField> c;
  for (const auto& comp : v) c.push_back(laplacian(comp));
  return VectorField(std::move(c));
}

/// Symbol -1/|k|^2; the zero mode (and any mode with vanishing symbol) is set to 0.
inline SpectralField inv_laplacian(const SpectralField& f) {
  SpectralField out(f.grid());
  for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky) {
    const double k2 = detail::k2_eff(f.grid(), kx, ky);
    out[idx] = k2 > 0.0 ? -f[idx] / k2 : cplx{};
  });
  return out;
}

/// Gradient (compressible) part Q v = -(-Delta)^{-1} grad div v, per mode k (k.v) / |k|^2.
inline VectorField project_Q(const VectorField& v) {
  const GridSpec& g = v.grid();
  detail::require_2d(g, "project_Q");
  VectorField out(g);
  const double k0 = g.k0();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky) {
    const double x = k0 * derivative_wavenumber(g, kx), y = k0 * derivative_wavenumber(g, ky);
    const double k2 = x * x + y * y;
    if (k2 == 0.0) return;
    const cplx kv = (x * v[0][idx] + y * v[1][idx]) / k2;
    out[0][idx] = x * kv;
    out[1][idx] = y * kv;
  });
  return out;
}

/// Leray projector P = Id - Q; the zero mode is kept in P.
inline VectorField project_P(const VectorField& v) { return v - project_Q(v); }

/// Zeroes every mode with some |k_i| > dealias_fraction * n / 2.
inline SpectralField dealias(SpectralField f) {
  const GridSpec& g = f.grid();
  const double cut = g.dealias_fraction * g.n / 2.0;
  for_each_mode(g, [&](std::size_t idx, int kx, int ky) {
    if (std::abs(kx) > cut || std::abs(ky) > cut) f[idx] = cplx{};
  });
  return f;
}

inline VectorField dealias(VectorField v) {
  for (auto& c : v) c = dealias(std::move(c));
  return v;
}

/// Dealiased pseudo-spectral product.
inline SpectralField product(const SpectralField& f, const SpectralField& g) {
  RealArray pf = transform_inverse(f);
  const RealArray pg = transform_inverse(g);
  for (std::size_t i = 0; i < pf.size(); ++i) pf[i] *= pg[i];
  return dealias(transform_forward(pf, f.grid()));
}

/// Integral over the torus of f * g (real fields), via Parseval.
inline double inner(const SpectralField& f, const SpectralField& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i].real() * g[i].real() + f[i].imag() * g[i].imag();
  return s * f.grid().volume();
}

inline double inner(const VectorField& u, const VectorField& v) {
  double s = 0.0;
  for (int a = 0; a < u.dim(); ++a) s += inner(u[a], v[a]);
  return s;
}

inline double l2_norm(const SpectralField& f) { return std::sqrt(inner(f, f)); }
inline double l2_norm(const VectorField& v) { return std::sqrt(inner(v, v)); }

/// L2 norm on the torus computed from physical samples (quadrature on the grid).
inline double l2_norm_physical(std::span<const double> samples, const GridSpec& g) {
  double s = 0.0;
  for (double x : samples) s += x * x;
  return std::sqrt(s * std::pow(g.dx(), g.d));
}

inline double max_abs(std::span<const double> samples) {
  double m = 0.0;
  for (double x : samples) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const SpectralField& f) { return max_abs(transform_inverse(f)); }

/// Pointwise Euclidean magnitude maximum of a vector field.
inline double max_magnitude(const VectorField& v) {
  const auto p = transform_inverse(v);
  double m = 0.0;
  for (std::size_t i = 0; i < p[0].size(); ++i) {
    double s = 0.0;
    for (const auto& c : p) s += c[i] * c[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

/// Largest coefficient magnitude; a cheap field "size" used for relative tolerances.
inline double max_coeff(const SpectralField& f) {
  double m = 0.0;
  for (const auto& c : f.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

inline double max_coeff(const VectorField& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, max_coeff(c));
  return m;
}

}  // namespace bmhd
