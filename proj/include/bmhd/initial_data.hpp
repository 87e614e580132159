#pragma once

// Initial data families. The compressible state (a0, u0, b0) and the
// incompressible data U0 = P u0, B0 = b0 are built together.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "bmhd/config.hpp"
#include "bmhd/error.hpp"
#include "bmhd/field.hpp"
#include "bmhd/mhd.hpp"
#include "bmhd/spectral.hpp"

namespace bmhd {

struct InitialStates {
  CompressibleState comp;
  IncompressibleState inc;
};

namespace detail {

/// Uniform double in [-1, 1) from the top 53 bits; identical on every platform.
inline double uniform_pm1(std::mt19937_64& rng) { return 2.0 * std::ldexp(static_cast<double>(rng() >> 11), -53) - 1.0; }

/// Random Hermitian scalar with modes 0 < |k| <= kmax. Draw order depends only on kmax,
/// so the same seed gives the same function on every grid.
inline SpectralField random_bandlimited_scalar(const GridSpec& g, std::mt19937_64& rng, int kmax = 4) {
  SpectralField f(g);
  for (int kx = -kmax; kx <= kmax; ++kx)
    for (int ky = 0; ky <= kmax; ++ky) {
      if (ky == 0 && kx <= 0) continue;
      if (kx * kx + ky * ky > kmax * kmax) continue;
      const cplx c(uniform_pm1(rng), uniform_pm1(rng));
      if (std::abs(kx) >= g.n / 2 || ky >= g.n / 2) continue;
      f.at(kx, ky) = c;
      f.at(-kx, -ky) = std::conj(c);
    }
  return dealias(f);
}

/// (-d_y psi, d_x psi).
inline VectorField stream_velocity(const SpectralField& psi) {
  return VectorField({-1.0 * derivative(psi, 1), derivative(psi, 0)});
}

inline SpectralField normalized(const SpectralField& f, double target) {
  const double m = max_abs(f);
  return m > 0.0 ? (target / m) * f : f;
}

inline VectorField normalized(const VectorField& v, double target) {
  const double m = max_magnitude(v);
  return m > 0.0 ? (target / m) * v : v;
}

}  // namespace detail

/// Builds (a0, u0, b0) and (U0, B0) = (P u0, b0).
///
/// taylor-green-mhd: u0 = A (sin x cos y, -cos x sin y), b0 = A (cos y, cos x),
///   density profile cos x cos y (coordinates scaled by 2 pi / L).
/// random-bandlimited: seeded stream functions and density profile with modes |k| <= 4,
///   normalized to max |u0| = max |b0| = A and max |profile| = 1.
/// a0 = A * profile / kappa for density_scaling "kappa-inverse", A * profile for "fixed".
/// A gradient part of relative size compressive_amplitude is added to u0.
inline InitialStates make_initial_data(const InitialDataConfig& cfg, const GridSpec& g, double kappa) {
  cfg.validate();
  g.validate();
  detail::require_solver_grid(g);
  if (!(kappa > 0.0)) throw InvalidArgument("make_initial_data: kappa must be > 0");
  const double A = cfg.amplitude;
  const int n = g.n;
  const double k0 = g.k0();

  SpectralField profile(g), compressive(g);
  VectorField u0(g), b0(g);
  if (cfg.family == "taylor-green-mhd") {
    RealArray ux(g.size()), uy(g.size()), bx(g.size()), by(g.size()), f(g.size()), cx(g.size()), cy(g.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double X = k0 * i * g.dx(), Y = k0 * j * g.dx();
        const std::size_t idx = static_cast<std::size_t>(i) * n + j;
        ux[idx] = A * std::sin(X) * std::cos(Y);
        uy[idx] = -A * std::cos(X) * std::sin(Y);
        bx[idx] = A * std::cos(Y);
        by[idx] = A * std::cos(X);
        f[idx] = std::cos(X) * std::cos(Y);
        // grad(cos x cos y) / k0
        cx[idx] = -std::sin(X) * std::cos(Y);
        cy[idx] = -std::cos(X) * std::sin(Y);
      }
    u0 = VectorField({transform_forward(ux, g), transform_forward(uy, g)});
    b0 = VectorField({transform_forward(bx, g), transform_forward(by, g)});
    profile = transform_forward(f, g);
    u0.axpy(cfg.compressive_amplitude * A, VectorField({transform_forward(cx, g), transform_forward(cy, g)}));
  } else if (cfg.family == "random-bandlimited") {
    std::mt19937_64 rng(cfg.seed);
    const SpectralField psi_u = detail::random_bandlimited_scalar(g, rng);
    const SpectralField psi_b = detail::random_bandlimited_scalar(g, rng);
    const SpectralField rho = detail::random_bandlimited_scalar(g, rng);
    const SpectralField phi = detail::random_bandlimited_scalar(g, rng);
    u0 = detail::normalized(detail::stream_velocity(psi_u), A);
    b0 = detail::normalized(detail::stream_velocity(psi_b), A);
    profile = detail::normalized(rho, 1.0);
    u0.axpy(1.0, detail::normalized(gradient(phi), cfg.compressive_amplitude * A));
  } else {
    throw ConfigError("initial_data.family: unknown family '" + cfg.family + "'");
  }

  const double a_scale = cfg.density_scaling == "kappa-inverse" ? A / kappa : A;
  InitialStates s;
  s.comp.a = dealias(a_scale * profile);
  s.comp.a[0] = cplx{};
  s.comp.u = dealias(u0);
  s.comp.b = project_P(dealias(b0));
  s.comp.t = 0.0;
  s.inc.U = project_P(s.comp.u);
  s.inc.B = s.comp.b;
  s.inc.t = 0.0;
  return s;
}

inline InitialStates make_initial_data(const RunConfig& cfg) {
  return make_initial_data(cfg.initial_data, cfg.grid, cfg.params.kappa());
}

}  // namespace bmhd
