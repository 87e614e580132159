#pragma once

// Second-order exponential time differencing (ETD2RK) for both systems, the
// CFL-limited time step and the running time-norm accumulator.

#include <algorithm>
#include <cmath>
#include <string>

#include "bmhd/error.hpp"
#include "bmhd/mhd.hpp"
#include "bmhd/propagator.hpp"
#include "bmhd/spectral.hpp"

namespace bmhd {

struct StepperConfig {
  double dt = 1e-3;       ///< upper bound on the step
  double cfl = 0.4;
  double t_end = 1.0;
  int norm_stride = 1;    ///< steps between functional samples

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("stepper.dt must be > 0");
    if (!(cfl > 0.0) || !std::isfinite(cfl)) throw InvalidArgument("stepper.cfl must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("stepper.t_end must be > 0");
    if (norm_stride < 1) throw InvalidArgument("stepper.norm_stride must be >= 1");
  }
};

inline constexpr double kMinTimeStep = 1e-12;

/// min(dt_max, cfl * dx / (max|u| + max|b| + sound speed at max rho)).
inline double adaptive_dt(const CompressibleState& s, const PhysParams& p, const StepperConfig& cfg) {
  const RealArray a = transform_inverse(s.a);
  double amax = -std::numeric_limits<double>::infinity();
  for (double x : a) {
    if (!std::isfinite(x)) throw BlowUp("non-finite density", s.t);
    amax = std::max(amax, x);
  }
  const double speed = max_magnitude(s.u) + max_magnitude(s.b) + PressureLaw{p.gamma}.sound_speed(1.0 + amax);
  if (!std::isfinite(speed)) throw BlowUp("non-finite velocity or magnetic field", s.t);
  const double dt = std::min(cfg.dt, cfg.cfl * s.grid().dx() / speed);
  if (dt < kMinTimeStep) throw BlowUp("time step fell below 1e-12", s.t);
  return dt;
}

/// Incompressible counterpart; the sound speed is taken as 1.
inline double adaptive_dt(const IncompressibleState& s, const StepperConfig& cfg) {
  const double speed = max_magnitude(s.U) + max_magnitude(s.B) + 1.0;
  if (!std::isfinite(speed)) throw BlowUp("non-finite incompressible field", s.t);
  const double dt = std::min(cfg.dt, cfg.cfl * s.grid().dx() / speed);
  if (dt < kMinTimeStep) throw BlowUp("time step fell below 1e-12", s.t);
  return dt;
}

namespace detail {

inline bool all_finite(const SpectralField& f) {
  return std::all_of(f.coeffs().begin(), f.coeffs().end(),
                     [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}
inline bool all_finite(const VectorField& v) {
  return std::all_of(v.begin(), v.end(), [](const SpectralField& f) { return all_finite(f); });
}

template <class State, class Nonlinear>
State etd2rk(const State& s, const LinearPropagator& prop, Nonlinear&& nonlinear) {
  using K = LinearPropagator::Kind;
  const double h = prop.dt();
  const State n0 = nonlinear(s);
  State mid = prop.apply(K::exp, s);
  mid.axpy(h, prop.apply(K::phi1, n0));
  State dn = nonlinear(mid);
  dn.axpy(-1.0, n0);
  mid.axpy(h, prop.apply(K::phi2, dn));
  mid.t = s.t + h;
  return mid;
}

}  // namespace detail

/// One ETD2RK step of the compressible system with the step fixed by prop.
/// Afterwards b is projected onto divergence-free fields and the mean of a is
/// reset to `mean_a` (both only remove roundoff).
inline CompressibleState step(const CompressibleState& s, const PhysParams& p, const LinearPropagator& prop,
                              double mean_a = 0.0) {
  CompressibleState out = [&] {
    try {
      return detail::etd2rk(s, prop, [&](const CompressibleState& x) { return nonlinear_compressible(x, p); });
    } catch (const SingularDensity& e) {
      throw BlowUp(std::string("density lost positivity: ") + e.what(), s.t);
    }
  }();
  out.b = project_P(out.b);
  out.a[0] = cplx(mean_a, 0.0);
  if (!detail::all_finite(out.a) || !detail::all_finite(out.u) || !detail::all_finite(out.b))
    throw BlowUp("non-finite compressible state", out.t);
  return out;
}

/// One ETD2RK step of the incompressible system; U and B are re-projected.
inline IncompressibleState step(const IncompressibleState& s, const PhysParams& p, const LinearPropagator& prop) {
  IncompressibleState out =
      detail::etd2rk(s, prop, [&](const IncompressibleState& x) { return nonlinear_incompressible(x, p); });
  out.U = project_P(out.U);
  out.B = project_P(out.B);
  if (!detail::all_finite(out.U) || !detail::all_finite(out.B))
    throw BlowUp("non-finite incompressible state", out.t);
  return out;
}

/// Running sup and trapezoid integral of a sampled nonnegative quantity.
struct NormAccumulator {
  double linf = 0.0;
  double l1 = 0.0;
  double last_t = 0.0;
  double last_value = 0.0;
  long samples = 0;

  void accumulate(double t, double value) {
    if (samples > 0 && t < last_t) throw InvalidArgument("NormAccumulator: time regression");
    if (samples == 0) {
      linf = value;
    } else {
      l1 += 0.5 * (t - last_t) * (value + last_value);
      linf = std::max(linf, value);
    }
    last_t = t;
    last_value = value;
    ++samples;
  }
};

inline NormAccumulator accumulate(NormAccumulator acc, double t, double value) {
  acc.accumulate(t, value);
  return acc;
}

}  // namespace bmhd
