#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "bmhd/mhd.hpp"
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

SpectralField from_fn(const GridSpec& g, const std::function<double(double, double)>& fn) {
  RealArray r(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) r[static_cast<std::size_t>(i) * g.n + j] = fn(i * g.dx(), j * g.dx());
  return transform_forward(r, g);
}

VectorField vec_fn(const GridSpec& g, const std::function<double(double, double)>& fx,
                   const std::function<double(double, double)>& fy) {
  return VectorField({from_fn(g, fx), from_fn(g, fy)});
}

double diff(const VectorField& a, const VectorField& b) { return max_coeff(a - b); }
double diff(const SpectralField& a, const SpectralField& b) { return max_coeff(a - b); }

SpectralField sized(SpectralField f, double amp) { return (amp / max_abs(f)) * f; }
VectorField sized(VectorField v, double amp) { return (amp / max_magnitude(v)) * v; }

// Random states with every mode inside the dealiasing cutoff.
struct Pair {
  CompressibleState comp;
  IncompressibleState inc;
};

Pair random_pair(const GridSpec& g, std::uint64_t seed, int kmax, double amp_dev = 0.1) {
  std::mt19937_64 rng(seed);
  Pair p;
  p.inc.U = sized(project_P(random_vector(g, rng, kmax)), 0.5);
  p.inc.B = sized(project_P(random_vector(g, rng, kmax)), 0.4);
  p.comp.a = sized(random_field(g, rng, kmax), amp_dev);
  p.comp.u = p.inc.U + sized(random_vector(g, rng, kmax), amp_dev);
  p.comp.b = p.inc.B + sized(project_P(random_vector(g, rng, kmax)), amp_dev);
  return p;
}

// Raw pointwise oracle. Physical samples of a field and of its gradient.
struct Raw {
  RealArray x, y;
  RealArray dx[2], dy[2];  // dx[j] = d_j x
};

Raw raw(const VectorField& v) {
  Raw r{transform_inverse(v[0]), transform_inverse(v[1]), {}, {}};
  for (int j = 0; j < 2; ++j) {
    r.dx[j] = transform_inverse(derivative(v[0], j));
    r.dy[j] = transform_inverse(derivative(v[1], j));
  }
  return r;
}

// (w . grad) z at point i.
std::pair<double, double> adv(const Raw& w, const Raw& z, std::size_t i) {
  return {w.x[i] * z.dx[0][i] + w.y[i] * z.dx[1][i], w.x[i] * z.dy[0][i] + w.y[i] * z.dy[1][i]};
}

VectorField collect(const GridSpec& g, const RealArray& x, const RealArray& y) {
  return VectorField({dealias(transform_forward(x, g)), dealias(transform_forward(y, g))});
}

enum class Which { R1, R2, R3 };

VectorField oracle_remainder(Which which, const Pair& s, const PhysParams& p) {
  const GridSpec& g = s.comp.grid();
  const VectorField v = s.comp.u - s.inc.U, c = s.comp.b - s.inc.B;
  const VectorField Qv = project_Q(v), Pv = v - Qv;
  const Raw U = raw(s.inc.U), B = raw(s.inc.B), V = raw(v), C = raw(c), P = raw(Pv), Q = raw(Qv);
  const Raw W = raw(v + s.inc.U), BC = raw(s.inc.B + c);
  const RealArray a = transform_inverse(s.comp.a);
  const RealArray ax = transform_inverse(derivative(s.comp.a, 0)), ay = transform_inverse(derivative(s.comp.a, 1));
  const RealArray divq = transform_inverse(divergence(Qv));
  RealArray ox(g.size()), oy(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = 1.0 + a[i];
    double x = 0.0, y = 0.0;
    auto add = [&](double coef, std::pair<double, double> t) {
      x += coef * t.first;
      y += coef * t.second;
    };
    if (which == Which::R1) {
      const double ka = std::pow(r, p.gamma - 1.0) - 1.0;
      add(r, adv(W, P, i));
      add(r, adv(W, U, i));
      add(a[i], adv(W, Q, i));
      x += ka * ax[i];
      y += ka * ay[i];
      add(-1.0, adv(BC, BC, i));
      // grad |b|^2 / 2 = b_j grad b_j
      x += BC.x[i] * BC.dx[0][i] + BC.y[i] * BC.dy[0][i];
      y += BC.x[i] * BC.dx[1][i] + BC.y[i] * BC.dy[1][i];
    } else if (which == Which::R2) {
      const Raw* UQ = nullptr;
      (void)UQ;
      add(r, adv(P, U, i));
      add(r, adv(P, Q, i));
      add(r, adv(U, Q, i));
      add(r, adv(Q, U, i));
      add(a[i], adv(W, P, i));
      add(a[i], adv(U, U, i));
      add(a[i], adv(Q, Q, i));
      add(-1.0, adv(BC, C, i));
      add(-1.0, adv(C, B, i));
    } else {
      x += divq[i] * (B.x[i] + C.x[i]);
      y += divq[i] * (B.y[i] + C.y[i]);
      add(1.0, adv(V, B, i));
      add(-1.0, adv(BC, V, i));
      add(-1.0, adv(C, U, i));
    }
    ox[i] = x;
    oy[i] = y;
  }
  return collect(g, ox, oy);
}

CompressibleState scaled_deviation(const Pair& base, double eps) {
  CompressibleState s;
  s.a = eps * base.comp.a;
  s.u = base.inc.U + eps * (base.comp.u - base.inc.U);
  s.b = base.inc.B + eps * (base.comp.b - base.inc.B);
  return s;
}

}  // namespace

TEST(Params, Validation) {
  PhysParams p;
  EXPECT_NO_THROW(p.validate());
  p.mu = -1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = PhysParams{};
  p.lambda = -0.3;  // kappa = -0.1
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = PhysParams{};
  p.nu = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = PhysParams{};
  p.gamma = 1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  const auto q = PhysParams::with_kappa(0.5, 100.0, 0.2);
  EXPECT_DOUBLE_EQ(q.lambda, 99.0);
  EXPECT_DOUBLE_EQ(q.kappa(), 100.0);
}

TEST(Pressure, LawAndK) {
  const PressureLaw law{1.4};
  EXPECT_DOUBLE_EQ(law.dpressure(1.0), 1.0);
  EXPECT_DOUBLE_EQ(law.k(0.0), 0.0);
  EXPECT_NEAR(law.k(0.21), std::pow(1.21, 0.4) - 1.0, 1e-15);
  // P'(rho) is the derivative of P(rho).
  const double h = 1e-6;
  EXPECT_NEAR((law.pressure(1.3 + h) - law.pressure(1.3 - h)) / (2 * h), law.dpressure(1.3), 1e-9);
}

TEST(Pressure, KOfAField) {
  const auto g = grid(32);
  EXPECT_EQ(max_coeff(k_of_a(SpectralField(g), PressureLaw{1.4})), 0.0);
  std::mt19937_64 rng(1);
  const auto a = sized(random_field(g, rng, 6), 0.3);
  EXPECT_LT(diff(k_of_a(a, PressureLaw{2.0}), a), 1e-15);
  const auto bad = sized(random_field(g, rng, 3), 1.5);
  EXPECT_THROW(k_of_a(bad, PressureLaw{1.4}), SingularDensity);
}

TEST(Incompressible, TaylorGreenViscousDecayAndInduction) {
  const auto g = grid(32);
  const double A = 0.7;
  PhysParams p;
  p.mu = 0.13;
  p.nu = 0.05;
  IncompressibleState s;
  s.U = vec_fn(g, [&](double x, double y) { return A * std::sin(x) * std::cos(y); },
               [&](double x, double y) { return -A * std::cos(x) * std::sin(y); });
  s.B = vec_fn(g, [&](double, double y) { return A * std::cos(y); }, [&](double x, double) { return A * std::cos(x); });
  const auto r = rhs_incompressible(s, p);
  // Advection and Lorentz force are both gradients: dU/dt = -2 mu U.
  EXPECT_LT(diff(r.U, -2.0 * p.mu * s.U), 1e-14);
  // E = A^2 cos x cos y (sin x + sin y); dB/dt = (d_y E, -d_x E) - nu B.
  const double A2 = A * A;
  const auto want = vec_fn(
      g,
      [&](double x, double y) {
        return A2 * (-std::cos(x) * std::sin(x) * std::sin(y) + std::cos(x) * std::cos(2 * y)) - p.nu * A * std::cos(y);
      },
      [&](double x, double y) {
        return -A2 * (std::cos(2 * x) * std::cos(y) - std::sin(x) * std::cos(y) * std::sin(y)) - p.nu * A * std::cos(x);
      });
  EXPECT_LT(diff(r.B, want), 1e-14);
}

TEST(Incompressible, AlfvenicStateHasNoNonlinearity) {
  const auto g = grid(32);
  std::mt19937_64 rng(3);
  IncompressibleState s;
  s.U = sized(project_P(random_vector(g, rng, 8)), 1.0);
  s.B = s.U;
  const auto n = nonlinear_incompressible(s, PhysParams{});
  EXPECT_LT(max_coeff(n.U), 1e-15);
  EXPECT_LT(max_coeff(n.B), 1e-15);
}

TEST(Incompressible, RatesAreDivergenceFree) {
  const auto g = grid(64);
  std::mt19937_64 rng(4);
  IncompressibleState s;
  s.U = sized(project_P(random_vector(g, rng)), 1.0);
  s.B = sized(project_P(random_vector(g, rng)), 1.0);
  const auto r = rhs_incompressible(s, PhysParams{});
  EXPECT_LT(max_abs(divergence(r.U)), 1e-12);
  EXPECT_LT(max_abs(divergence(r.B)), 1e-12);
}

TEST(Compressible, RestAndUniformFieldAreSteady) {
  const auto g = grid(16);
  auto s = CompressibleState::zero(g);
  auto r = rhs_compressible(s, PhysParams{});
  EXPECT_EQ(max_coeff(r.a) + max_coeff(r.u) + max_coeff(r.b), 0.0);
  s.b[0][0] = 0.3;
  s.b[1][0] = -0.7;
  s.u[0][0] = 0.2;
  r = rhs_compressible(s, PhysParams{});
  EXPECT_LT(max_coeff(r.a) + max_coeff(r.u) + max_coeff(r.b), 1e-16);
}

TEST(Compressible, MassRateHasZeroMean) {
  const auto g = grid(32);
  const auto s = random_pair(g, 5, -1, 0.3).comp;
  EXPECT_LT(std::abs(rhs_compressible(s, PhysParams{}).a[0]), 1e-16);
}

TEST(Compressible, InductionRateIsDivergenceFree) {
  const auto g = grid(64);
  const auto s = random_pair(g, 6, -1, 0.3).comp;
  const auto r = rhs_compressible(s, PhysParams{});
  EXPECT_LT(max_abs(divergence(r.b)), 1e-12);
}

TEST(Compressible, LinearAcousticWave) {
  // a = eps cos x, u = 0: da/dt = 0, du/dt = -grad a + O(eps^2).
  const auto g = grid(32);
  const double eps = 1e-6;
  auto s = CompressibleState::zero(g);
  s.a = from_fn(g, [&](double x, double) { return eps * std::cos(x); });
  const auto r = rhs_compressible(s, PhysParams::with_kappa(0.1, 1.0, 0.1));
  EXPECT_EQ(max_coeff(r.a), 0.0);
  const auto want = -1.0 * gradient(s.a);
  EXPECT_LT(diff(r.u, want), 1e-5 * max_coeff(want));
  // u = eps (sin x, 0): da/dt = -eps cos x, du/dt = -kappa eps (sin x, 0) at leading order.
  auto t = CompressibleState::zero(g);
  t.u[0] = from_fn(g, [&](double x, double) { return eps * std::sin(x); });
  const auto p = PhysParams::with_kappa(0.1, 3.0, 0.1);
  const auto q = rhs_compressible(t, p);
  EXPECT_LT(diff(q.a, from_fn(g, [&](double x, double) { return -eps * std::cos(x); })), 1e-5 * eps);
  EXPECT_LT(diff(q.u[0], -p.kappa() * t.u[0]), 1e-5 * eps);
}

TEST(Compressible, ReducesToIncompressibleForConstantDensity) {
  const auto g = grid(32);
  const auto pr = random_pair(g, 8, 10);
  auto s = CompressibleState::zero(g);
  s.u = pr.inc.U;
  s.b = pr.inc.B;
  const PhysParams p;
  const auto rc = rhs_compressible(s, p);
  const auto ri = rhs_incompressible(pr.inc, p);
  EXPECT_LT(max_coeff(rc.a), 1e-15);
  EXPECT_LT(diff(project_P(rc.u), ri.U), 1e-13);
  EXPECT_LT(diff(rc.b, ri.B), 1e-15);
}

TEST(Compressible, NoFieldMatchesConservativeNavierStokes) {
  // Oracle in conservative variables: d(rho u)/dt = -div(rho u u) - grad P + mu Lap u + (mu+lambda) grad div u,
  // then du/dt = (d(rho u)/dt - u d rho/dt) / rho. Smooth low-mode data keep aliasing below rounding.
  const auto g = grid(64);
  std::mt19937_64 rng(9);
  auto s = CompressibleState::zero(g);
  s.a = sized(random_field(g, rng, 2), 0.05);
  s.u = sized(random_vector(g, rng, 2), 0.05);
  const PhysParams p = PhysParams::with_kappa(0.2, 2.0, 0.1, 1.4);
  const PressureLaw law{p.gamma};
  const auto r = rhs_compressible(s, p);

  const RealArray a = transform_inverse(s.a), ux = transform_inverse(s.u[0]), uy = transform_inverse(s.u[1]);
  const std::size_t N = g.size();
  RealArray rho(N), mx(N), my(N), P(N), fxx(N), fxy(N), fyy(N);
  for (std::size_t i = 0; i < N; ++i) {
    rho[i] = 1.0 + a[i];
    mx[i] = rho[i] * ux[i];
    my[i] = rho[i] * uy[i];
    P[i] = law.pressure(rho[i]);
    fxx[i] = mx[i] * ux[i];
    fxy[i] = mx[i] * uy[i];
    fyy[i] = my[i] * uy[i];
  }
  auto F = [&](const RealArray& x) { return transform_forward(x, g); };
  auto D = [&](const RealArray& x, int ax) { return transform_inverse(derivative(F(x), ax)); };
  const RealArray drho = transform_inverse(-1.0 * (derivative(F(mx), 0) + derivative(F(my), 1)));
  const SpectralField divu = divergence(s.u);
  const double bulk = p.mu + p.lambda;
  const RealArray vx = transform_inverse(p.mu * laplacian(s.u[0]) + bulk * derivative(divu, 0));
  const RealArray vy = transform_inverse(p.mu * laplacian(s.u[1]) + bulk * derivative(divu, 1));
  const RealArray dfxx = D(fxx, 0), dfxy0 = D(fxy, 0), dfxy1 = D(fxy, 1), dfyy = D(fyy, 1);
  const RealArray px = D(P, 0), py = D(P, 1);
  RealArray ox(N), oy(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double dmx = -(dfxx[i] + dfxy1[i]) - px[i] + vx[i];
    const double dmy = -(dfxy0[i] + dfyy[i]) - py[i] + vy[i];
    ox[i] = (dmx - ux[i] * drho[i]) / rho[i];
    oy[i] = (dmy - uy[i] * drho[i]) / rho[i];
  }
  const VectorField want = collect(g, ox, oy);
  EXPECT_LT(diff(r.u, want), 1e-10 * max_coeff(want));
  EXPECT_LT(diff(r.a, dealias(F(drho))), 1e-12 * max_coeff(r.a));
  EXPECT_EQ(max_coeff(r.b), 0.0);
}

TEST(Remainders, MatchPointwiseOracle) {
  const auto g = grid(32);
  const PhysParams p = PhysParams::with_kappa(0.1, 10.0, 0.1, 1.4);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto s = random_pair(g, seed, 5, 0.2);
    const auto r1 = remainder_R1(s.comp, s.inc, p), r2 = remainder_R2(s.comp, s.inc, p),
               r3 = remainder_R3(s.comp, s.inc, p);
    EXPECT_LT(diff(r1, oracle_remainder(Which::R1, s, p)), 1e-12 * std::max(1.0, max_coeff(r1)));
    EXPECT_LT(diff(r2, oracle_remainder(Which::R2, s, p)), 1e-12 * std::max(1.0, max_coeff(r2)));
    EXPECT_LT(diff(r3, oracle_remainder(Which::R3, s, p)), 1e-12 * std::max(1.0, max_coeff(r3)));
  }
}

TEST(Remainders, VanishWithoutDeviation) {
  const auto g = grid(32);
  const auto s = random_pair(g, 14, 5);
  auto c = CompressibleState::zero(g);
  c.u = s.inc.U;
  c.b = s.inc.B;
  const PhysParams p;
  EXPECT_LT(max_coeff(remainder_R2(c, s.inc, p)), 1e-15);
  EXPECT_LT(max_coeff(remainder_R3(c, s.inc, p)), 1e-15);
  // R1 reduces to U.grad U - B.grad B + grad |B|^2 / 2, which P maps to -dU/dt + mu Lap U.
  const auto r1 = remainder_R1(c, s.inc, p);
  const auto ri = rhs_incompressible(s.inc, p);
  EXPECT_LT(diff(project_P(r1), -1.0 * (ri.U - p.mu * laplacian(s.inc.U))), 1e-13);
}

TEST(Remainders, ExpandedAndUnexpandedDifferByGradient) {
  const auto g = grid(32);
  const auto s = random_pair(g, 15, 5, 0.2);
  const PhysParams p;
  const auto d = remainder_R2(s.comp, s.inc, p) - remainder_R2_unexpanded(s.comp, s.inc, p);
  const auto Qv = project_Q(s.comp.u - s.inc.U);
  const Raw q = raw(Qv);
  RealArray x(g.size()), y(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) std::tie(x[i], y[i]) = adv(q, q, i);
  EXPECT_LT(diff(d, -1.0 * collect(g, x, y)), 1e-14);
  EXPECT_LT(max_coeff(project_P(d)), 1e-14);
}

TEST(Remainders, PolynomialDegreeInDeviation) {
  // R2 is cubic and R3 quadratic in the deviation (a, v, c); both vanish at zero.
  const auto g = grid(32);
  const auto base = random_pair(g, 16, 5, 0.2);
  const PhysParams p;
  const double h = 0.25;
  auto r2 = [&](double e) { return remainder_R2(scaled_deviation(base, e), base.inc, p); };
  auto r3 = [&](double e) { return remainder_R3(scaled_deviation(base, e), base.inc, p); };
  const auto d4 = r2(0) - 4.0 * r2(h) + 6.0 * r2(2 * h) - 4.0 * r2(3 * h) + r2(4 * h);
  EXPECT_LT(max_coeff(d4), 1e-13);
  const auto d3 = -1.0 * r3(0) + 3.0 * r3(h) - 3.0 * r3(2 * h) + r3(3 * h);
  EXPECT_LT(max_coeff(d3), 1e-13);
  // Richardson: first-order coefficient. R(2e) - 2 R(e) = O(e^2).
  const double e = 1e-4;
  const auto lin = r2(2 * e) - 2.0 * r2(e);
  EXPECT_LT(max_coeff(lin), 10.0 * e * e * max_coeff(r2(1.0)));
  EXPECT_GT(max_coeff(r2(e)), 0.1 * e * max_coeff(r2(1.0)) * 1e-3);
}

TEST(Remainders, RejectMismatchedGrids) {
  const auto s = random_pair(grid(16), 1, 3);
  const auto t = random_pair(grid(32), 1, 3);
  EXPECT_THROW(remainder_R1(s.comp, t.inc, PhysParams{}), InvalidArgument);
}

TEST(Validate, ConstraintChecks) {
  const auto g = grid(32);
  auto s = random_pair(g, 17, 5).comp;
  auto r = validate_state(s, s.a.mean());
  EXPECT_TRUE(r.ok());
  EXPECT_LT(r.rel_div_b, 1e-13);
  // Gradient magnetic field violates the constraint.
  std::mt19937_64 rng(2);
  auto bad = s;
  bad.b = bad.b + gradient(random_field(g, rng, 4));
  EXPECT_FALSE(validate_state(bad, s.a.mean()).div_b_ok);
  // Mean drift.
  auto drift = s;
  drift.a[0] += 1e-9;
  EXPECT_FALSE(validate_state(drift, s.a.mean()).mean_ok);
  EXPECT_NEAR(validate_state(drift, s.a.mean()).mean_drift, 1e-9, 1e-15);
  // Vacuum.
  auto vac = s;
  vac.a = sized(vac.a, 1.2);
  const auto rv = validate_state(vac, vac.a.mean());
  EXPECT_FALSE(rv.density_ok);
  EXPECT_LT(rv.min_density, 0.0);
}
