#pragma once

// Time-integrated Besov functionals of the compressible/incompressible pair,
// the constants M, D0, delta0 with their smallness checks, the per-block
// Lyapunov functional, energy balance and deviation norms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bmhd/error.hpp"
#include "bmhd/littlewood_paley.hpp"
#include "bmhd/mhd.hpp"
#include "bmhd/spectral.hpp"
#include "bmhd/stepper.hpp"

namespace bmhd {

/// Critical regularity d/2 - 1 of the functionals.
inline double critical_index(const GridSpec& g) { return 0.5 * g.d - 1.0; }

/// Instantaneous norms of the incompressible solution entering Z_d and the energy balance.
struct IncNorms {
  double t = 0.0;
  double U = 0.0, B = 0.0;            // L-infinity-in-time terms
  double U_t = 0.0, B_t = 0.0;        // L1-in-time terms
  double lapU = 0.0, lapB = 0.0;      // mu |Lap U|, nu |Lap B|
  double U2 = 0.0, B2 = 0.0;          // |U|^2_{L2}, |B|^2_{L2}
  double gradU2 = 0.0, gradB2 = 0.0;  // |grad U|^2_{L2}, |grad B|^2_{L2}
};

/// Instantaneous norms of the deviation (v, c) = (u - U, b - B) and of a.
struct DevNorms {
  double t = 0.0;
  // X_d
  double Qv = 0.0, a = 0.0, kgrad_a = 0.0;
  double Qv_t_grad_a = 0.0, kLapQv = 0.0, kLap_a_low = 0.0, grad_a_high = 0.0;
  // Y_d
  double Pv = 0.0, c = 0.0;
  double Pv_t = 0.0, c_t = 0.0, muLapPv = 0.0, nuLapc = 0.0;
  // deviation and constraints
  double dev_u = 0.0, dev_b = 0.0;
  double div_b_max = 0.0, rel_div_b = 0.0, min_rho = 1.0, mean_a = 0.0;
};

inline double grad_norm2(const VectorField& v) {
  double s = 0.0;
  for (const auto& c : v)
    for (int ax = 0; ax < c.grid().d; ++ax) {
      const double n = l2_norm(derivative(c, ax));
      s += n * n;
    }
  return s;
}

inline IncNorms inc_norms(const IncompressibleState& s, const IncompressibleState& rate, const PhysParams& p,
                          const DyadicProfile& prof) {
  const double sc = critical_index(s.grid());
  IncNorms n;
  n.t = s.t;
  n.U = besov21(s.U, sc, prof);
  n.B = besov21(s.B, sc, prof);
  n.U_t = besov21(rate.U, sc, prof);
  n.B_t = besov21(rate.B, sc, prof);
  n.lapU = p.mu * besov21(laplacian(s.U), sc, prof);
  n.lapB = p.nu * besov21(laplacian(s.B), sc, prof);
  const double lu = l2_norm(s.U), lb = l2_norm(s.B);
  n.U2 = lu * lu;
  n.B2 = lb * lb;
  n.gradU2 = grad_norm2(s.U);
  n.gradB2 = grad_norm2(s.B);
  return n;
}

inline DevNorms dev_norms(const CompressibleState& comp, const CompressibleState& comp_rate,
                          const IncompressibleState& inc, const IncompressibleState& inc_rate, const PhysParams& p,
                          const DyadicProfile& prof) {
  if (std::abs(comp.t - inc.t) > 1e-12 * std::max(1.0, std::abs(comp.t)))
    throw InvalidArgument("functionals: mismatched timelines");
  const double sc = critical_index(comp.grid());
  const double kappa = p.kappa();
  DevNorms n;
  n.t = comp.t;
  const VectorField v = comp.u - inc.U;
  const VectorField c = comp.b - inc.B;
  const VectorField Qv = project_Q(v);
  const VectorField Pv = v - Qv;
  const VectorField v_t = comp_rate.u - inc_rate.U;
  const VectorField Qv_t = project_Q(v_t);
  const VectorField Pv_t = v_t - Qv_t;
  const VectorField grad_a = gradient(comp.a);

  n.Qv = besov21(Qv, sc, prof);
  n.a = besov21(comp.a, sc, prof);
  n.kgrad_a = kappa * besov21(grad_a, sc, prof);
  n.Qv_t_grad_a = besov21(Qv_t + grad_a, sc, prof);
  n.kLapQv = kappa * besov21(laplacian(Qv), sc, prof);
  auto [a_low, a_high] = low_high_split(comp.a, kappa, prof);
  n.kLap_a_low = kappa * besov21(laplacian(a_low), sc, prof);
  n.grad_a_high = besov21(gradient(a_high), sc, prof);

  n.Pv = besov21(Pv, sc, prof);
  n.c = besov21(c, sc, prof);
  n.Pv_t = besov21(Pv_t, sc, prof);
  n.c_t = besov21(comp_rate.b - inc_rate.B, sc, prof);
  n.muLapPv = p.mu * besov21(laplacian(Pv), sc, prof);
  n.nuLapc = p.nu * besov21(laplacian(c), sc, prof);

  n.dev_u = besov21(v, sc, prof);
  n.dev_b = n.c;
  const StateReport rep = validate_state(comp, 0.0);
  n.div_b_max = rep.max_div_b;
  n.rel_div_b = rep.rel_div_b;
  n.min_rho = rep.min_density;
  n.mean_a = rep.mean_a;
  return n;
}

/// One row of the functional time series.
struct FunctionalRecord {
  double t = 0.0;
  double Xd = 0.0, Yd = 0.0, Yd1 = 0.0, Yd2 = 0.0, Zd = 0.0;
  double E_kin = 0.0, E_mag = 0.0, diss_U = 0.0, diss_B = 0.0;
  double div_b_max = 0.0, min_rho = 1.0, dev_u = 0.0, dev_b = 0.0;
};

using FunctionalSeries = std::vector<FunctionalRecord>;

/// Streaming accumulation of Z_d and the energy balance from incompressible samples.
struct ZdTracker {
  NormAccumulator U, B, U_t, B_t, lapU, lapB;
  NormAccumulator dissU, dissB;  // integrands 2 mu |grad U|^2 and 2 nu |grad B|^2
  double energy0 = 0.0;          // |U0|^2 + |B0|^2
  double max_drift = 0.0;
  double last_drift = 0.0;

  void push(const IncNorms& n, const PhysParams& p) {
    U.accumulate(n.t, n.U);
    B.accumulate(n.t, n.B);
    U_t.accumulate(n.t, n.U_t);
    B_t.accumulate(n.t, n.B_t);
    lapU.accumulate(n.t, n.lapU);
    lapB.accumulate(n.t, n.lapB);
    dissU.accumulate(n.t, 2.0 * p.mu * n.gradU2);
    dissB.accumulate(n.t, 2.0 * p.nu * n.gradB2);
    if (U.samples == 1) energy0 = n.U2 + n.B2;
    const double lhs = n.U2 + n.B2 + dissU.l1 + dissB.l1;
    last_drift = energy0 > 0.0 ? std::abs(lhs - energy0) / energy0 : std::abs(lhs - energy0);
    max_drift = std::max(max_drift, last_drift);
  }

  double Zd() const { return U.linf + B.linf + U_t.l1 + B_t.l1 + lapU.l1 + lapB.l1; }
};

/// Streaming accumulation of X_d, Y_d and the deviation suprema.
struct XYTracker {
  NormAccumulator Qv, a, kgrad_a, Qv_t_grad_a, kLapQv, kLap_a_low, grad_a_high;
  NormAccumulator Pv, c, Pv_t, c_t, muLapPv, nuLapc;
  NormAccumulator dev_u, dev_b;
  double max_rel_div_b = 0.0;
  double max_mean_drift = 0.0;
  double min_rho = std::numeric_limits<double>::infinity();
  double mean_a0 = 0.0;

  void push(const DevNorms& n) {
    Qv.accumulate(n.t, n.Qv);
    a.accumulate(n.t, n.a);
    kgrad_a.accumulate(n.t, n.kgrad_a);
    Qv_t_grad_a.accumulate(n.t, n.Qv_t_grad_a);
    kLapQv.accumulate(n.t, n.kLapQv);
    kLap_a_low.accumulate(n.t, n.kLap_a_low);
    grad_a_high.accumulate(n.t, n.grad_a_high);
    Pv.accumulate(n.t, n.Pv);
    c.accumulate(n.t, n.c);
    Pv_t.accumulate(n.t, n.Pv_t);
    c_t.accumulate(n.t, n.c_t);
    muLapPv.accumulate(n.t, n.muLapPv);
    nuLapc.accumulate(n.t, n.nuLapc);
    dev_u.accumulate(n.t, n.dev_u);
    dev_b.accumulate(n.t, n.dev_b);
    if (Qv.samples == 1) mean_a0 = n.mean_a;
    max_rel_div_b = std::max(max_rel_div_b, n.rel_div_b);
    max_mean_drift = std::max(max_mean_drift, std::abs(n.mean_a - mean_a0));
    min_rho = std::min(min_rho, n.min_rho);
  }

  double Xd() const {
    return Qv.linf + a.linf + kgrad_a.linf + Qv_t_grad_a.l1 + kLapQv.l1 + kLap_a_low.l1 + grad_a_high.l1;
  }
  double Yd1() const { return Pv.linf + c.linf; }
  double Yd2() const { return Pv_t.l1 + c_t.l1 + muLapPv.l1 + nuLapc.l1; }
  double Yd() const { return Yd1() + Yd2(); }
};

inline FunctionalRecord make_record(const IncNorms& in, const DevNorms& dn, const ZdTracker& z,
                                    const XYTracker& xy) {
  FunctionalRecord r;
  r.t = in.t;
  r.Xd = xy.Xd();
  r.Yd1 = xy.Yd1();
  r.Yd2 = xy.Yd2();
  r.Yd = r.Yd1 + r.Yd2;
  r.Zd = z.Zd();
  r.E_kin = 0.5 * in.U2;
  r.E_mag = 0.5 * in.B2;
  r.diss_U = z.dissU.l1;
  r.diss_B = z.dissB.l1;
  r.div_b_max = dn.div_b_max;
  r.min_rho = dn.min_rho;
  r.dev_u = xy.dev_u.linf;
  r.dev_b = xy.dev_b.linf;
  return r;
}

// ---------------------------------------------------------------------------
// Batch evaluation over stored trajectories. Each sample carries the state and
// its time derivative (the full right-hand side at that state).

struct IncSample {
  IncompressibleState state;
  IncompressibleState rate;
};

struct CompSample {
  CompressibleState state;
  CompressibleState rate;
};

inline IncSample make_inc_sample(const IncompressibleState& s, const PhysParams& p) {
  IncSample out{s, rhs_incompressible(s, p)};
  out.rate.t = s.t;
  return out;
}

inline CompSample make_comp_sample(const CompressibleState& s, const PhysParams& p) {
  CompSample out{s, rhs_compressible(s, p)};
  out.rate.t = s.t;
  return out;
}

namespace detail {

inline void check_timelines(const std::vector<CompSample>& comp, const std::vector<IncSample>& inc) {
  if (comp.empty() || inc.empty()) throw InvalidArgument("functionals: empty trajectory");
  if (comp.size() != inc.size()) throw InvalidArgument("functionals: mismatched timelines");
  for (std::size_t i = 0; i < comp.size(); ++i)
    if (std::abs(comp[i].state.t - inc[i].state.t) > 1e-12 * std::max(1.0, std::abs(comp[i].state.t)))
      throw InvalidArgument("functionals: mismatched timelines");
}

inline XYTracker replay_xy(const std::vector<CompSample>& comp, const std::vector<IncSample>& inc,
                           const PhysParams& p, double T) {
  check_timelines(comp, inc);
  const DyadicProfile prof(comp.front().state.grid());
  XYTracker xy;
  for (std::size_t i = 0; i < comp.size() && comp[i].state.t <= T; ++i)
    xy.push(dev_norms(comp[i].state, comp[i].rate, inc[i].state, inc[i].rate, p, prof));
  return xy;
}

}  // namespace detail

/// Z_d(T) over the samples with t <= T.
inline double compute_Zd(const std::vector<IncSample>& run, const PhysParams& p, double T) {
  if (run.empty()) throw InvalidArgument("compute_Zd: empty trajectory");
  const DyadicProfile prof(run.front().state.grid());
  ZdTracker z;
  for (const auto& s : run) {
    if (s.state.t > T) break;
    z.push(inc_norms(s.state, s.rate, p, prof), p);
  }
  return z.Zd();
}

inline double compute_Xd(const std::vector<CompSample>& comp, const std::vector<IncSample>& inc,
                         const PhysParams& p, double T) {
  return detail::replay_xy(comp, inc, p, T).Xd();
}

struct YdValue {
  double Yd = 0.0, Yd1 = 0.0, Yd2 = 0.0;
};

inline YdValue compute_Yd(const std::vector<CompSample>& comp, const std::vector<IncSample>& inc,
                          const PhysParams& p, double T) {
  const XYTracker xy = detail::replay_xy(comp, inc, p, T);
  return {xy.Yd(), xy.Yd1(), xy.Yd2()};
}

/// (sup_t |u - U|, sup_t |b - B|) in B^{d/2-1}_{2,1} over t <= T.
inline std::pair<double, double> deviation_norms(const std::vector<CompSample>& comp,
                                                 const std::vector<IncSample>& inc, const PhysParams& p,
                                                 double T) {
  const XYTracker xy = detail::replay_xy(comp, inc, p, T);
  return {xy.dev_u.linf, xy.dev_b.linf};
}

/// Z_d at the final sample; the finite-horizon surrogate of sup_T Z_d(T).
inline double compute_M(const std::vector<IncSample>& run, const PhysParams& p) {
  if (run.empty()) throw InvalidArgument("compute_M: empty trajectory");
  return compute_Zd(run, p, run.back().state.t);
}

/// C |U0, B0|_{B^0_{2,1}} exp(C (mu^-4 + nu^-4) |U0, B0|^4_{L2}) (pair norms are sums).
inline double compute_M_2d_bound(const VectorField& U0, const VectorField& B0, const PhysParams& p,
                                 double C = 1.0) {
  if (U0.grid().d != 2) throw InvalidArgument("compute_M_2d_bound: d = 2 only");
  const DyadicProfile prof(U0.grid());
  const double b0 = besov21(U0, 0.0, prof) + besov21(B0, 0.0, prof);
  const double l2 = l2_norm(U0) + l2_norm(B0);
  return C * b0 * std::exp(C * (std::pow(p.mu, -4) + std::pow(p.nu, -4)) * std::pow(l2, 4));
}

struct EnergyReport {
  std::vector<double> drift;  ///< per sample
  double max_drift = 0.0;
  bool relative = true;       ///< false when the initial energy is zero (absolute drift)
};

/// |U|^2 + |B|^2 + 2 mu int |grad U|^2 + 2 nu int |grad B|^2 against its initial value.
inline EnergyReport energy_balance(const std::vector<IncSample>& run, const PhysParams& p) {
  if (run.empty()) throw InvalidArgument("energy_balance: empty trajectory");
  const DyadicProfile prof(run.front().state.grid());
  EnergyReport rep;
  ZdTracker z;
  for (const auto& s : run) {
    z.push(inc_norms(s.state, s.rate, p, prof), p);
    rep.drift.push_back(z.last_drift);
  }
  rep.max_drift = z.max_drift;
  rep.relative = z.energy0 > 0.0;
  return rep;
}

/// Initial-data part of X_d: |a0, Qv0|_{B^{d/2-1}} + kappa |a0|_{B^{d/2}}.
struct InitialData {
  double a0 = 0.0;     ///< |a0|_{B^{d/2-1}_{2,1}}
  double Qv0 = 0.0;    ///< |Qv0|_{B^{d/2-1}_{2,1}}
  double a0_hi = 0.0;  ///< |a0|_{B^{d/2}_{2,1}}

  double Xd0(double kappa) const { return a0 + Qv0 + kappa * a0_hi; }
};

inline InitialData initial_data_norms(const CompressibleState& comp, const IncompressibleState& inc) {
  const DyadicProfile prof(comp.grid());
  const double sc = critical_index(comp.grid());
  return {besov21(comp.a, sc, prof), besov21(project_Q(comp.u - inc.U), sc, prof), besov21(comp.a, sc + 1.0, prof)};
}

struct TheoremBudget {
  double M = 0.0, D0 = 0.0, delta0 = 0.0, kappa = 0.0;
  double log_D0 = 0.0, log_delta0 = 0.0;
  double C_universal = 1.0, threshold = 0.01;
  double kappa_check_value = 0.0;  ///< D0 / kappa
  double delta_check_value = 0.0;  ///< delta0 (1/mu + 1/nu + 1)
  bool kappa_check = false;        ///< D0 / kappa <= threshold
  bool delta_check = false;        ///< delta0 (1/mu + 1/nu + 1) <= 1/2

  bool pass() const { return kappa_check && delta_check; }
};

/// D0 = C e^{C(1 + 1/mu + 1/nu)(M+1)^2} (|a0, Qv0| + kappa |a0|_{B^{d/2}} + 1),
/// delta0 = C e^{2C(1 + mu^-2 + nu^-2)(M+1)^2} (D0^2 / kappa + D0 / sqrt(kappa)).
/// Evaluated in log space; D0 and delta0 overflow to infinity rather than to NaN.
inline TheoremBudget compute_budget(const InitialData& data, const PhysParams& p, double M, double C = 1.0,
                                    double threshold = 0.01) {
  if (!(C > 0.0)) throw InvalidArgument("compute_budget: C must be > 0");
  if (!(M >= 0.0)) throw InvalidArgument("compute_budget: M must be >= 0");
  const double kappa = p.kappa();
  const double m2 = (M + 1.0) * (M + 1.0);
  TheoremBudget b;
  b.M = M;
  b.kappa = kappa;
  b.C_universal = C;
  b.threshold = threshold;
  b.log_D0 = std::log(C) + C * (1.0 + 1.0 / p.mu + 1.0 / p.nu) * m2 + std::log(data.Xd0(kappa) + 1.0);
  // log(D0^2/kappa + D0/sqrt(kappa)) = log D0 - log(kappa)/2 + log1p(D0/sqrt(kappa)).
  const double log_ratio = b.log_D0 - 0.5 * std::log(kappa);
  const double log_sum = log_ratio > 700.0 ? b.log_D0 + log_ratio : b.log_D0 - 0.5 * std::log(kappa) + std::log1p(std::exp(log_ratio));
  b.log_delta0 = std::log(C) + 2.0 * C * (1.0 + 1.0 / (p.mu * p.mu) + 1.0 / (p.nu * p.nu)) * m2 + log_sum;
  b.D0 = std::exp(b.log_D0);
  b.delta0 = std::exp(b.log_delta0);
  const double factor = 1.0 / p.mu + 1.0 / p.nu + 1.0;
  b.kappa_check_value = std::exp(b.log_D0 - std::log(kappa));
  b.delta_check_value = std::exp(b.log_delta0 + std::log(factor));
  b.kappa_check = b.log_D0 - std::log(kappa) <= std::log(threshold);
  b.delta_check = b.log_delta0 + std::log(factor) <= std::log(0.5);
  return b;
}

struct LyapunovBlock {
  int j = 0;
  double L2 = 0.0;     ///< int 2 a_j^2 + |q_j|^2 + |q_j + kappa grad a_j|^2
  double norm2 = 0.0;  ///< |(q_j, a_j, kappa grad a_j)|^2_{L2}
  double ratio = std::numeric_limits<double>::quiet_NaN();  ///< NaN for an empty block

  bool empty() const { return norm2 == 0.0; }
};

/// Per-block Lyapunov functional of the acoustic pair (a, Qv), via Parseval.
inline std::vector<LyapunovBlock> lyapunov_blocks(const CompressibleState& comp, const IncompressibleState& inc,
                                                  const PhysParams& p, const DyadicProfile& prof) {
  const GridSpec& g = comp.grid();
  const VectorField q = project_Q(comp.u - inc.U);
  const double kappa = p.kappa();
  const double k0 = g.k0();
  std::vector<LyapunovBlock> out(prof.block_count());
  for (int b = 0; b < prof.block_count(); ++b) out[b].j = prof.j_min() + b;
  const cplx I(0.0, 1.0);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky) {
    if (prof.xi(idx) == 0.0) return;
    const double kvec[2] = {k0 * derivative_wavenumber(g, kx), k0 * derivative_wavenumber(g, ky)};
    for (int j : {prof.first_block(idx), prof.first_block(idx) + 1}) {
      const double w = prof.weight(j, idx);
      if (w == 0.0 || j > prof.j_max()) continue;
      const cplx aj = w * comp.a[idx];
      double L = 2.0 * std::norm(aj), N = std::norm(aj);
      for (int d = 0; d < 2; ++d) {
        const cplx qj = w * q[d][idx];
        const cplx gj = kappa * I * kvec[d] * aj;
        L += std::norm(qj) + std::norm(qj + gj);
        N += std::norm(qj) + std::norm(gj);
      }
      auto& blk = out[j - prof.j_min()];
      blk.L2 += L;
      blk.norm2 += N;
    }
  });
  const double vol = g.volume();
  for (auto& blk : out) {
    blk.L2 *= vol;
    blk.norm2 *= vol;
    if (!blk.empty()) blk.ratio = blk.L2 / blk.norm2;
  }
  return out;
}

}  // namespace bmhd
