#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bmhd/diagnostics.hpp"
#include "bmhd/random.hpp"

using namespace bmhd;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec grid(int n, double L = 2.0 * kPi) {
  GridSpec g;
  g.n = n;
  g.period = L;
  return g;
}

SpectralField sized(SpectralField f, double amp) { return (amp / max_abs(f)) * f; }
VectorField sized(VectorField v, double amp) { return (amp / max_magnitude(v)) * v; }

// U = A e^{-mu t} (sin y, 0): exact solution of incompressible MHD with B = 0.
IncompressibleState shear(const GridSpec& g, double A, double mu, double t) {
  auto s = IncompressibleState::zero(g);
  const double amp = A * std::exp(-mu * t);
  s.U[0].at(0, 1) = cplx(0, -0.5 * amp);
  s.U[0].at(0, -1) = cplx(0, 0.5 * amp);
  s.t = t;
  return s;
}

std::vector<IncSample> shear_run(const GridSpec& g, const PhysParams& p, double A, double T, int steps) {
  std::vector<IncSample> run;
  for (int i = 0; i <= steps; ++i) run.push_back(make_inc_sample(shear(g, A, p.mu, T * i / steps), p));
  return run;
}

// Synthetic trajectory pair: incompressible shear plus a smooth deviation whose
// size varies in time. It need not solve anything; the functionals only read samples.
struct Trajectory {
  std::vector<CompSample> comp;
  std::vector<IncSample> inc;
};

Trajectory synthetic(const GridSpec& g, const PhysParams& p, int steps, double T) {
  std::mt19937_64 rng(42);
  const auto a0 = sized(random_field(g, rng, 5), 0.05);
  const auto v0 = sized(random_vector(g, rng, 5), 0.05);
  const auto c0 = sized(project_P(random_vector(g, rng, 5)), 0.05);
  const auto B = sized(project_P(random_vector(g, rng, 3)), 0.3);
  Trajectory tr;
  for (int i = 0; i <= steps; ++i) {
    const double t = T * i / steps, f = std::cos(3.0 * t) + 0.2 * t;
    auto inc = shear(g, 0.4, p.mu, t);
    inc.B = std::exp(-p.nu * t) * B;
    CompressibleState comp{f * a0, inc.U + f * v0, inc.B + f * c0, t};
    tr.inc.push_back(make_inc_sample(inc, p));
    tr.comp.push_back(make_comp_sample(comp, p));
  }
  return tr;
}

}  // namespace

TEST(Zd, ShearModeClosedForm) {
  // Z_d(T) = N0 (1 + 2 (1 - e^{-mu T})) with N0 = |U0|_{B^0_{2,1}}, since |U_t| = mu |Lap U| = mu N0 e^{-mu t}.
  const auto g = grid(32);
  PhysParams p;
  p.mu = 0.4;
  const double T = 2.0;
  const auto run = shear_run(g, p, 0.8, T, 2000);
  const DyadicProfile prof(g);
  const double N0 = besov21(run.front().state.U, 0.0, prof);
  const double want = N0 * (1.0 + 2.0 * (1.0 - std::exp(-p.mu * T)));
  EXPECT_NEAR(compute_Zd(run, p, T), want, 1e-6 * want);
  EXPECT_NEAR(compute_M(run, p), want, 1e-6 * want);
  // Partial horizon.
  const double half = N0 * (1.0 + 2.0 * (1.0 - std::exp(-p.mu * 1.0)));
  EXPECT_NEAR(compute_Zd(run, p, 1.0), half, 1e-6 * half);
}

TEST(Zd, MonotoneInHorizon) {
  const auto g = grid(32);
  const PhysParams p;
  const auto tr = synthetic(g, p, 50, 1.0);
  double prev = 0.0;
  for (double T = 0.0; T <= 1.0; T += 0.1) {
    const double z = compute_Zd(tr.inc, p, T);
    EXPECT_GE(z, prev);
    prev = z;
  }
  EXPECT_THROW(compute_Zd({}, p, 1.0), InvalidArgument);
}

TEST(Xd, InitialValueAndKappaScaling) {
  const auto g = grid(32);
  const auto p = PhysParams::with_kappa(0.1, 10.0, 0.1);
  const auto tr = synthetic(g, p, 10, 0.1);
  const DyadicProfile prof(g);
  const auto& c0 = tr.comp.front().state;
  const auto& i0 = tr.inc.front().state;
  const double qv = besov21(project_Q(c0.u - i0.U), 0.0, prof), a = besov21(c0.a, 0.0, prof);
  const double ga = besov21(gradient(c0.a), 0.0, prof);
  EXPECT_NEAR(compute_Xd(tr.comp, tr.inc, p, 0.0), qv + a + p.kappa() * ga, 1e-14);
  // Initial-data part is affine in kappa.
  const auto d = initial_data_norms(c0, i0);
  EXPECT_DOUBLE_EQ(d.a0, a);
  EXPECT_DOUBLE_EQ(d.Qv0, qv);
  EXPECT_NEAR(d.Xd0(20.0) - d.Xd0(10.0), 10.0 * d.a0_hi, 1e-14);
  EXPECT_NEAR(d.Xd0(20.0) - d.Xd0(10.0), d.Xd0(10.0) - d.Xd0(0.0), 1e-14);
}

TEST(Yd, ReplayMatchesIndependentQuadrature) {
  const auto g = grid(32);
  const PhysParams p;
  const auto tr = synthetic(g, p, 40, 0.8);
  const DyadicProfile prof(g);
  double sup_pv = 0, sup_c = 0, int2 = 0, prev = 0, prev_t = 0;
  for (std::size_t i = 0; i < tr.comp.size(); ++i) {
    const auto& cs = tr.comp[i];
    const auto& is = tr.inc[i];
    const VectorField v = cs.state.u - is.state.U, c = cs.state.b - is.state.B;
    const VectorField vt = cs.rate.u - is.rate.U, ct = cs.rate.b - is.rate.B;
    const VectorField Pv = project_P(v);
    sup_pv = std::max(sup_pv, besov21(Pv, 0.0, prof));
    sup_c = std::max(sup_c, besov21(c, 0.0, prof));
    const double integrand = besov21(project_P(vt), 0.0, prof) + besov21(ct, 0.0, prof) +
                             p.mu * besov21(laplacian(Pv), 0.0, prof) + p.nu * besov21(laplacian(c), 0.0, prof);
    if (i > 0) int2 += 0.5 * (cs.state.t - prev_t) * (integrand + prev);
    prev = integrand;
    prev_t = cs.state.t;
  }
  const auto y = compute_Yd(tr.comp, tr.inc, p, 0.8);
  EXPECT_NEAR(y.Yd1, sup_pv + sup_c, 1e-10 * y.Yd1);
  EXPECT_NEAR(y.Yd2, int2, 1e-10 * int2);
  EXPECT_NEAR(y.Yd, y.Yd1 + y.Yd2, 1e-15);
}

TEST(Functionals, VanishWithoutDeviation) {
  const auto g = grid(32);
  const PhysParams p;
  std::vector<CompSample> comp;
  std::vector<IncSample> inc;
  for (int i = 0; i <= 5; ++i) {
    const auto s = shear(g, 0.5, p.mu, 0.1 * i);
    inc.push_back(make_inc_sample(s, p));
    comp.push_back(make_comp_sample(CompressibleState{SpectralField(g), s.U, s.B, s.t}, p));
  }
  // With a = 0 the compressible rate of U differs from the projected one only by the pressure gradient.
  const auto y = compute_Yd(comp, inc, p, 1.0);
  EXPECT_LT(y.Yd, 1e-14);
  const auto [du, db] = deviation_norms(comp, inc, p, 1.0);
  EXPECT_EQ(du, 0.0);
  EXPECT_EQ(db, 0.0);
}

TEST(Functionals, MismatchedTimelinesRejected) {
  const auto g = grid(16);
  const PhysParams p;
  const auto tr = synthetic(g, p, 4, 0.4);
  auto inc = tr.inc;
  inc.pop_back();
  EXPECT_THROW(compute_Xd(tr.comp, inc, p, 1.0), InvalidArgument);
  inc = tr.inc;
  inc[2].state.t += 1e-6;
  EXPECT_THROW(compute_Yd(tr.comp, inc, p, 1.0), InvalidArgument);
}

TEST(MBound, ClosedFormExample) {
  // A plateau mode (|xi| = 3) has |U|_{B^0_{2,1}} = |U|_{L2}; scale it to L2 norm 1.
  const auto g = grid(32);
  auto U = VectorField(g);
  U[1].at(3, 0) = U[1].at(-3, 0) = 0.5;
  U = (1.0 / l2_norm(U)) * U;
  const VectorField B(g);
  const auto p = PhysParams{2.0, 0.0, 2.0, 1.4};  // mu^-4 + nu^-4 = 1/8
  EXPECT_NEAR(compute_M_2d_bound(U, B, p, 1.0), std::exp(0.125), 1e-12);
  EXPECT_NEAR(compute_M_2d_bound(U, B, p, 0.1), 0.1 * std::exp(0.0125), 1e-12);
  EXPECT_NEAR(compute_M_2d_bound(0.1 * U, B, p, 1.0), 0.1 * std::exp(0.125e-4), 1e-14);
}

TEST(Budget, ClosedFormExample) {
  // C = 1, mu = nu = 1, M = 0, zero data: D0 = e^3, delta0 = e^6 (e^6 / kappa + e^3 / sqrt kappa).
  const InitialData zero{};
  for (double kappa : {10.0, 1e4, 1e12}) {
    const auto p = PhysParams::with_kappa(1.0, kappa, 1.0);
    const auto b = compute_budget(zero, p, 0.0, 1.0, 0.01);
    EXPECT_NEAR(b.D0, std::exp(3.0), 1e-12 * std::exp(3.0));
    const double d = std::exp(6.0) * (std::exp(6.0) / kappa + std::exp(3.0) / std::sqrt(kappa));
    EXPECT_NEAR(b.delta0, d, 1e-12 * d);
    EXPECT_NEAR(b.kappa_check_value, std::exp(3.0) / kappa, 1e-12 * std::exp(3.0) / kappa);
    EXPECT_EQ(b.kappa_check, std::exp(3.0) / kappa <= 0.01);
    EXPECT_EQ(b.delta_check, 3.0 * d <= 0.5);
  }
  // Large kappa passes both checks.
  const auto big = compute_budget(zero, PhysParams::with_kappa(1.0, 1e14, 1.0), 0.0);
  EXPECT_TRUE(big.pass());
}

TEST(Budget, OverflowStaysFiniteInLogSpace) {
  InitialData d{0.1, 0.2, 0.3};
  const auto p = PhysParams::with_kappa(0.1, 1e4, 0.1);
  const auto b = compute_budget(d, p, 50.0);
  EXPECT_TRUE(std::isfinite(b.log_D0));
  EXPECT_TRUE(std::isfinite(b.log_delta0));
  EXPECT_TRUE(std::isinf(b.delta0));
  EXPECT_FALSE(std::isnan(b.delta_check_value));
  EXPECT_FALSE(b.pass());
  // log D0 = C (1 + 1/mu + 1/nu)(M + 1)^2 + log(Xd0 + 1).
  EXPECT_NEAR(b.log_D0, 21.0 * 51.0 * 51.0 + std::log(d.Xd0(1e4) + 1.0), 1e-9);
  EXPECT_THROW(compute_budget(d, p, -1.0), InvalidArgument);
  EXPECT_THROW(compute_budget(d, p, 1.0, 0.0), InvalidArgument);
}

TEST(Lyapunov, SingleModeClosedForm) {
  // a = eps cos(3x), q = 0: ratio = (2 + kappa^2 9) / (1 + kappa^2 9) in its plateau block.
  const auto g = grid(32);
  const auto p = PhysParams::with_kappa(0.1, 0.5, 0.1);
  auto comp = CompressibleState::zero(g);
  comp.a.at(3, 0) = comp.a.at(-3, 0) = 0.01;
  const auto inc = IncompressibleState::zero(g);
  const auto blocks = lyapunov_blocks(comp, inc, p, DyadicProfile(g));
  int nonempty = 0;
  for (const auto& b : blocks) {
    if (b.empty()) {
      EXPECT_TRUE(std::isnan(b.ratio));
      continue;
    }
    ++nonempty;
    EXPECT_EQ(b.j, 1);
    const double k2 = 0.25 * 9.0;
    EXPECT_NEAR(b.ratio, (2.0 + k2) / (1.0 + k2), 1e-14);
  }
  EXPECT_EQ(nonempty, 1);
}

TEST(Lyapunov, RatioWithinEigenvalueBounds) {
  // The quadratic form 2a^2 + q^2 + (q + g)^2 against a^2 + q^2 + g^2 has eigenvalues
  // in [(3 - sqrt 5)/2, (3 + sqrt 5)/2].
  const auto g = grid(32);
  std::mt19937_64 rng(3);
  const DyadicProfile prof(g);
  for (double kappa : {0.5, 10.0, 1e3}) {
    const auto p = PhysParams::with_kappa(0.1, kappa, 0.1);
    for (int i = 0; i < 10; ++i) {
      CompressibleState c{random_field(g, rng), random_vector(g, rng), VectorField(g), 0.0};
      for (const auto& b : lyapunov_blocks(c, IncompressibleState::zero(g), p, prof)) {
        if (b.empty()) continue;
        EXPECT_GE(b.ratio, (3.0 - std::sqrt(5.0)) / 2.0 - 1e-12);
        EXPECT_LE(b.ratio, (3.0 + std::sqrt(5.0)) / 2.0 + 1e-12);
      }
    }
  }
}

TEST(Energy, BalanceOnExactSolution) {
  const auto g = grid(32);
  PhysParams p;
  p.mu = 0.3;
  const auto run = shear_run(g, p, 0.5, 1.0, 1000);
  const auto rep = energy_balance(run, p);
  EXPECT_TRUE(rep.relative);
  EXPECT_EQ(rep.drift.size(), run.size());
  EXPECT_EQ(rep.drift.front(), 0.0);
  // Trapezoid error of int 2 mu e^{-2 mu t}: h^2/12 (2 mu)^2 (1 - e^{-2mu}) ~ 1e-8.
  EXPECT_LT(rep.max_drift, 1e-7);
  // Wrong viscosity breaks the balance.
  PhysParams wrong = p;
  wrong.mu = 0.15;
  EXPECT_GT(energy_balance(run, wrong).max_drift, 0.1);
  const auto zero = energy_balance({make_inc_sample(IncompressibleState::zero(g), p)}, p);
  EXPECT_FALSE(zero.relative);
  EXPECT_EQ(zero.max_drift, 0.0);
}

TEST(Records, RecordCollectsTrackers) {
  const auto g = grid(16);
  const PhysParams p;
  const auto tr = synthetic(g, p, 4, 0.4);
  const DyadicProfile prof(g);
  ZdTracker z;
  XYTracker xy;
  IncNorms in;
  DevNorms dn;
  for (std::size_t i = 0; i < tr.comp.size(); ++i) {
    in = inc_norms(tr.inc[i].state, tr.inc[i].rate, p, prof);
    dn = dev_norms(tr.comp[i].state, tr.comp[i].rate, tr.inc[i].state, tr.inc[i].rate, p, prof);
    z.push(in, p);
    xy.push(dn);
  }
  const auto r = make_record(in, dn, z, xy);
  EXPECT_DOUBLE_EQ(r.t, 0.4);
  EXPECT_DOUBLE_EQ(r.Zd, compute_Zd(tr.inc, p, 0.4));
  EXPECT_DOUBLE_EQ(r.Xd, compute_Xd(tr.comp, tr.inc, p, 0.4));
  EXPECT_DOUBLE_EQ(r.E_kin, 0.5 * std::pow(l2_norm(tr.inc.back().state.U), 2));
  EXPECT_EQ(r.min_rho, dn.min_rho);
}
