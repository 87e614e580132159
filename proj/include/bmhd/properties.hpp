#pragma once

// Structural invariants of every layer, evaluated on seeded data and reported
// as a table of measured value, threshold and verdict.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "bmhd/diagnostics.hpp"
#include "bmhd/littlewood_paley.hpp"
#include "bmhd/mhd.hpp"
#include "bmhd/propagator.hpp"
#include "bmhd/random.hpp"
#include "bmhd/spectral.hpp"

namespace bmhd {

struct PropertyResult {
  std::string name;
  double value = 0.0;
  double value_hi = 0.0;  ///< largest measured value for "in"
  double threshold = 0.0;
  std::string relation = "<=";  ///< "<=" or "in"
  double upper = 0.0;           ///< upper end for "in"
  bool pass = false;
};

struct PropertyOptions {
  double fault_scale = 1.0;  ///< multiplies phi; anything but 1 should break the partition of unity
  std::uint64_t seed = 20240601;
  int samples = 20;
};

namespace detail {

inline PropertyResult at_most(std::string name, double v, double thr) {
  PropertyResult r;
  r.name = std::move(name);
  r.value = r.value_hi = v;
  r.threshold = thr;
  r.pass = v <= thr;
  return r;
}

inline PropertyResult within(std::string name, double lo_v, double hi_v, double lo, double hi) {
  PropertyResult r;
  r.name = std::move(name);
  r.value = lo_v;
  r.value_hi = hi_v;
  r.threshold = lo;
  r.relation = "in";
  r.upper = hi;
  r.pass = lo_v >= lo && hi_v <= hi;
  return r;
}

inline double partition_residual(const DyadicProfile& p) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.grid().size(); ++i) {
    if (p.xi(i) == 0.0) continue;
    double s = 0.0;
    for (int j = p.j_min(); j <= p.j_max(); ++j) s += p.multiplier(j, p.xi(i));
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

inline double rel_diff(const SpectralField& a, const SpectralField& b, double scale) {
  return l2_norm(a - b) / std::max(scale, 1e-300);
}

inline double rel_diff(const VectorField& a, const VectorField& b, double scale) {
  return l2_norm(a - b) / std::max(scale, 1e-300);
}

}  // namespace detail

inline std::vector<PropertyResult> run_property_suite(const PropertyOptions& opt = {}) {
  using namespace detail;
  std::vector<PropertyResult> out;
  std::mt19937_64 rng(opt.seed);
  GridSpec g64;
  g64.n = 64;
  GridSpec g128 = g64;
  g128.n = 128;
  const DyadicProfile p64 = DyadicProfile(g64).scaled(opt.fault_scale);
  const DyadicProfile p128 = DyadicProfile(g128).scaled(opt.fault_scale);

  out.push_back(at_most("lp.partition_of_unity.n64", partition_residual(p64), 1e-12));
  out.push_back(at_most("lp.partition_of_unity.n128", partition_residual(p128), 1e-12));

  double ortho = 0.0, recon = 0.0, eq_lo = HUGE_VAL, eq_hi = 0.0, scale_err = 0.0;
  for (int s = 0; s < opt.samples; ++s) {
    const SpectralField f = random_field(g64, rng, -1, false);
    const auto dec = decompose(f, p64);
    for (const auto& [j, bj] : dec.blocks)
      for (int k = j + 2; k <= p64.j_max(); ++k) ortho = std::max(ortho, max_coeff(lp_block(bj, k, p64)));
    SpectralField mf = f;
    mf[0] = cplx{};
    recon = std::max(recon, rel_diff(dec.reconstruct(), mf, l2_norm(f)));
    const double r = besov_norm(f, BesovIndex{0.0, 2.0, 2.0}, p64) / l2_norm(mf);
    eq_lo = std::min(eq_lo, r);
    eq_hi = std::max(eq_hi, r);
    const double b1 = besov21(f, 0.5, p64), b2 = besov21(-3.5 * f, 0.5, p64);
    scale_err = std::max(scale_err, std::abs(b2 - 3.5 * b1) / (3.5 * b1));
  }
  out.push_back(at_most("lp.block_orthogonality", ortho, 0.0));
  out.push_back(at_most("lp.reconstruction", recon, 1e-12));
  out.push_back(within("lp.B0_22_vs_L2", eq_lo, eq_hi, 1.0 / std::sqrt(2.0), std::sqrt(2.0)));
  out.push_back(at_most("lp.besov_homogeneity", scale_err, 1e-13));

  double proj = 0.0, divp = 0.0, comm = 0.0;
  for (int s = 0; s < opt.samples; ++s) {
    const VectorField v = random_vector(g64, rng);
    const double nv = l2_norm(v);
    const VectorField P = project_P(v), Q = project_Q(v);
    proj = std::max({proj, rel_diff(project_P(P), P, nv), rel_diff(project_Q(Q), Q, nv), l2_norm(project_P(Q)) / nv,
                     rel_diff(P + Q, v, nv)});
    divp = std::max(divp, max_abs(divergence(P)) / max_magnitude(v));
    for (int ax = 0; ax < 2; ++ax) {
      VectorField dv({derivative(v[0], ax), derivative(v[1], ax)});
      const VectorField Pd = project_P(dv);
      VectorField dP({derivative(P[0], ax), derivative(P[1], ax)});
      comm = std::max(comm, rel_diff(Pd, dP, l2_norm(dv)));
    }
  }
  out.push_back(at_most("spectral.projector_algebra", proj, 1e-12));
  out.push_back(at_most("spectral.div_P", divp, 1e-12));
  out.push_back(at_most("spectral.derivative_commutes_with_P", comm, 1e-12));

  {
    double prod = 0.0, interp = 0.0, compo = 0.0;
    for (int s = 0; s < 5; ++s) {
      const SpectralField f = dealias(random_field(g64, rng, 6));
      const SpectralField h = dealias(random_field(g64, rng, 6));
      const double r0 = check_product(f, h, 1.0, 1.0, p64);
      prod = std::max(prod, std::abs(check_product(2.5 * f, 0.3 * h, 1.0, 1.0, p64) - r0) / r0);
      const double i0 = check_interpolation(f, 0.0, 1.0, 0.5, p64);
      interp = std::max(interp, std::abs(check_interpolation(7.0 * f, 0.0, 1.0, 0.5, p64) - i0) / i0);
      const SpectralField small = (0.01 / max_abs(f)) * f;
      const double c0 = check_composition(small, 0.0, 2.0, p64);
      compo = std::max(compo, std::abs(check_composition(3.0 * small, 0.0, 2.0, p64) - c0) / c0);
    }
    out.push_back(at_most("lp.product_scale_invariance", prod, 1e-10));
    out.push_back(at_most("lp.interpolation_scale_invariance", interp, 1e-10));
    out.push_back(at_most("lp.composition_scale_invariance.gamma2", compo, 1e-10));
  }

  {
    const PhysParams p = PhysParams::with_kappa(0.5, 100.0, 0.5);
    double lo = HUGE_VAL, hi = 0.0, energy = 0.0, mass = 0.0, divdb = 0.0;
    for (int s = 0; s < 5; ++s) {
      auto sized = [](const auto& f, double amp) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, SpectralField>) return (amp / max_abs(f)) * f;
        else return (amp / max_magnitude(f)) * f;
      };
      CompressibleState c = CompressibleState::zero(g64);
      c.a = sized(dealias(random_field(g64, rng, 8)), 0.05);
      c.u = sized(dealias(random_vector(g64, rng, 8)), 0.1);
      c.b = sized(project_P(dealias(random_vector(g64, rng, 8))), 0.1);
      IncompressibleState in{sized(project_P(dealias(random_vector(g64, rng, 8))), 0.1),
                             sized(project_P(dealias(random_vector(g64, rng, 8))), 0.1), 0.0};
      for (const auto& blk : lyapunov_blocks(c, in, p, p64)) {
        if (blk.empty()) continue;
        lo = std::min(lo, blk.ratio);
        hi = std::max(hi, blk.ratio);
      }
      const IncompressibleState r = rhs_incompressible(in, p);
      const double dE = inner(in.U, r.U) + inner(in.B, r.B);
      const double diss = p.mu * grad_norm2(in.U) + p.nu * grad_norm2(in.B);
      energy = std::max(energy, std::abs(dE + diss) / diss);
      const CompressibleState rc = rhs_compressible(c, p);
      mass = std::max(mass, std::abs(rc.a[0]));
      divdb = std::max(divdb, max_abs(divergence(rc.b)) / std::max(max_magnitude(rc.b), 1e-300));
    }
    out.push_back(within("diagnostics.lyapunov_ratio", lo, hi, 1.0 / 3.0, 3.0));
    out.push_back(at_most("mhd.energy_derivative_identity", energy, 1e-8));
    out.push_back(at_most("mhd.mass_rate_zero_mode", mass, 1e-15));
    out.push_back(at_most("mhd.div_db_dt", divdb, 1e-10));
  }

  {
    double semi = 0.0;
    for (double kappa : {1.0, 1e2, 1e4, 1e6}) {
      const Mat2 a = acoustic_exponential(1.0, kappa, 0.004), b = acoustic_exponential(1.0, kappa, 0.006);
      const Mat2 ab = a * b, c = acoustic_exponential(1.0, kappa, 0.01);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) semi = std::max(semi, std::abs(ab(i, j) - c(i, j)));
    }
    out.push_back(at_most("time.propagator_semigroup", semi, 1e-12));
  }
  return out;
}

inline bool all_pass(const std::vector<PropertyResult>& r) {
  return std::all_of(r.begin(), r.end(), [](const PropertyResult& p) { return p.pass; });
}

}  // namespace bmhd
