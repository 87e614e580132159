#pragma once

// Barotropic compressible MHD in velocity form and its incompressible limit:
// parameters, pressure law, states, right-hand sides and the remainder terms
// R1, R2, R3 of the (v, c) = (u - U, b - B) reformulation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bmhd/error.hpp"
#include "bmhd/field.hpp"
#include "bmhd/spectral.hpp"

namespace bmhd {

struct PhysParams {
  double mu = 0.1;
  double lambda = 0.0;
  double nu = 0.1;
  double gamma = 1.4;

  double kappa() const { return lambda + 2.0 * mu; }

  void validate() const {
    if (!(mu > 0.0)) throw InvalidArgument("params.mu must be > 0 (strong parabolicity: mu > 0, kappa = lambda + 2 mu > 0)");
    if (!(kappa() > 0.0))
      throw InvalidArgument("params.lambda gives kappa = lambda + 2 mu <= 0 (strong parabolicity requires kappa > 0)");
    if (!(nu > 0.0)) throw InvalidArgument("params.nu (resistivity) must be > 0");
    if (!(gamma > 1.0)) throw InvalidArgument("params.gamma must be > 1");
  }

  static PhysParams with_kappa(double mu, double kappa, double nu, double gamma = 1.4) {
    return PhysParams{mu, kappa - 2.0 * mu, nu, gamma};
  }
};

/// P(rho) = rho^gamma / gamma, normalized so that P'(1) = 1.
struct PressureLaw {
  double gamma = 1.4;

  double pressure(double rho) const { return std::pow(rho, gamma) / gamma; }
  double dpressure(double rho) const { return std::pow(rho, gamma - 1.0); }
  /// k(a) = P'(1 + a) - 1.
  double k(double a) const { return std::pow(1.0 + a, gamma - 1.0) - 1.0; }
  double sound_speed(double rho) const { return std::sqrt(dpressure(rho)); }
};

/// (a, u, b) with a = rho - 1. Also used for time derivatives of the same shape.
struct CompressibleState {
  SpectralField a;
  VectorField u;
  VectorField b;
  double t = 0.0;

  static CompressibleState zero(const GridSpec& g) { return {SpectralField(g), VectorField(g), VectorField(g), 0.0}; }
  const GridSpec& grid() const { return a.grid(); }

  CompressibleState& axpy(double s, const CompressibleState& o) {
    a.axpy(s, o.a);
    u.axpy(s, o.u);
    b.axpy(s, o.b);
    return *this;
  }
};

/// (U, B), both divergence free. Also used for time derivatives.
struct IncompressibleState {
  VectorField U;
  VectorField B;
  double t = 0.0;

  static IncompressibleState zero(const GridSpec& g) { return {VectorField(g), VectorField(g), 0.0}; }
  const GridSpec& grid() const { return U.grid(); }

  IncompressibleState& axpy(double s, const IncompressibleState& o) {
    U.axpy(s, o.U);
    B.axpy(s, o.B);
    return *this;
  }
};

namespace detail {

struct PhysVec {
  RealArray x, y;
};

inline PhysVec to_phys(const VectorField& v) { return {transform_inverse(v[0]), transform_inverse(v[1])}; }

/// Physical samples of d_j v_i, indexed [i][j].
struct PhysGrad {
  RealArray d[2][2];
};

inline PhysGrad phys_grad(const VectorField& v) {
  PhysGrad g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g.d[i][j] = transform_inverse(derivative(v[i], j));
  return g;
}

inline VectorField vec_from_phys(const RealArray& x, const RealArray& y, const GridSpec& g) {
  return VectorField({dealias(transform_forward(x, g)), dealias(transform_forward(y, g))});
}

/// curl of the out-of-plane scalar E: (d_y E, -d_x E).
inline VectorField curl_scalar(const SpectralField& E) {
  SpectralField ey = derivative(E, 1), ex = derivative(E, 0);
  ex *= -1.0;
  return VectorField({std::move(ey), std::move(ex)});
}

/// Dealiased u_x b_y - u_y b_x; the 2D induction nonlinearity is curl of this.
inline SpectralField emf(const PhysVec& u, const PhysVec& b, const GridSpec& g) {
  RealArray e(u.x.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = u.x[i] * b.y[i] - u.y[i] * b.x[i];
  return dealias(transform_forward(e, g));
}

inline void require_solver_grid(const GridSpec& g) {
  if (g.d != 2) throw InvalidArgument("solvers support d = 2 only");
}

}  // namespace detail

/// Explicit (nonlinear) part of the compressible right-hand side.
///
/// The linear part handled by the propagator is
///   da/dt = -div u,  du/dt = -grad a + mu Lap u + (mu + lambda) grad div u,  db/dt = nu Lap b;
/// this function returns everything else, with all products dealiased.
inline CompressibleState nonlinear_compressible(const CompressibleState& s, const PhysParams& p) {
  const GridSpec& g = s.grid();
  detail::require_solver_grid(g);
  const PressureLaw law{p.gamma};
  const RealArray a = transform_inverse(s.a);
  const auto u = detail::to_phys(s.u);
  const auto b = detail::to_phys(s.b);
  const auto du = detail::phys_grad(s.u);
  const auto db = detail::phys_grad(s.b);
  const RealArray ax = transform_inverse(derivative(s.a, 0)), ay = transform_inverse(derivative(s.a, 1));
  const SpectralField divu = divergence(s.u);
  const double bulk = p.mu + p.lambda;
  const RealArray vx = transform_inverse(p.mu * laplacian(s.u[0]) + bulk * derivative(divu, 0));
  const RealArray vy = transform_inverse(p.mu * laplacian(s.u[1]) + bulk * derivative(divu, 1));

  const std::size_t npts = a.size();
  RealArray aux(npts), auy(npts), nx(npts), ny(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    const double rho = 1.0 + a[i];
    if (!(rho > 0.0)) throw SingularDensity("compressible rhs: 1 + a <= 0 on the grid");
    aux[i] = a[i] * u.x[i];
    auy[i] = a[i] * u.y[i];
    // -P'(rho) grad a / rho = -grad a - (k(a) - a) / rho * grad a; the first part is linear.
    const double pk = (law.k(a[i]) - a[i]) / rho;
    const double inv_rho_m1 = -a[i] / rho;
    // Lorentz force b.grad b - grad |b|^2 / 2, with grad |b|^2 / 2 = b_j grad b_j.
    const double lx = b.x[i] * db.d[0][0][i] + b.y[i] * db.d[0][1][i] - (b.x[i] * db.d[0][0][i] + b.y[i] * db.d[1][0][i]);
    const double ly = b.x[i] * db.d[1][0][i] + b.y[i] * db.d[1][1][i] - (b.x[i] * db.d[0][1][i] + b.y[i] * db.d[1][1][i]);
    nx[i] = -(u.x[i] * du.d[0][0][i] + u.y[i] * du.d[0][1][i]) - pk * ax[i] + inv_rho_m1 * vx[i] + lx / rho;
    ny[i] = -(u.x[i] * du.d[1][0][i] + u.y[i] * du.d[1][1][i]) - pk * ay[i] + inv_rho_m1 * vy[i] + ly / rho;
  }
  CompressibleState out;
  out.a = -1.0 * divergence(detail::vec_from_phys(aux, auy, g));
  out.u = detail::vec_from_phys(nx, ny, g);
  out.b = detail::curl_scalar(detail::emf(u, b, g));
  out.t = s.t;
  return out;
}

/// Linear part of the compressible right-hand side (see nonlinear_compressible).
inline CompressibleState linear_compressible(const CompressibleState& s, const PhysParams& p) {
  CompressibleState out;
  out.a = -1.0 * divergence(s.u);
  const SpectralField divu = divergence(s.u);
  out.u = VectorField(s.grid());
  for (int i = 0; i < 2; ++i)
    out.u[i] = -1.0 * derivative(s.a, i) + p.mu * laplacian(s.u[i]) + (p.mu + p.lambda) * derivative(divu, i);
  out.b = p.nu * laplacian(s.b);
  out.t = s.t;
  return out;
}

/// Full time derivative (da/dt, du/dt, db/dt) of the compressible system in velocity form:
///   da/dt = -div(a u) - div u
///   du/dt = -u.grad u + [-P'(1+a) grad a + mu Lap u + grad((mu+lambda) div u) + b.grad b - grad|b|^2/2] / (1+a)
///   db/dt = -(div u) b - u.grad b + b.grad u + nu Lap b
inline CompressibleState rhs_compressible(const CompressibleState& s, const PhysParams& p) {
  CompressibleState r = linear_compressible(s, p);
  r.axpy(1.0, nonlinear_compressible(s, p));
  return r;
}

/// Explicit part of the incompressible right-hand side: (P[-U.grad U + B.grad B], curl(U x B)).
inline IncompressibleState nonlinear_incompressible(const IncompressibleState& s, const PhysParams&) {
  const GridSpec& g = s.grid();
  detail::require_solver_grid(g);
  const auto U = detail::to_phys(s.U);
  const auto B = detail::to_phys(s.B);
  const auto dU = detail::phys_grad(s.U);
  const auto dB = detail::phys_grad(s.B);
  const std::size_t npts = U.x.size();
  RealArray nx(npts), ny(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    nx[i] = -(U.x[i] * dU.d[0][0][i] + U.y[i] * dU.d[0][1][i]) + B.x[i] * dB.d[0][0][i] + B.y[i] * dB.d[0][1][i];
    ny[i] = -(U.x[i] * dU.d[1][0][i] + U.y[i] * dU.d[1][1][i]) + B.x[i] * dB.d[1][0][i] + B.y[i] * dB.d[1][1][i];
  }
  IncompressibleState out;
  out.U = project_P(detail::vec_from_phys(nx, ny, g));
  out.B = detail::curl_scalar(detail::emf(U, B, g));
  out.t = s.t;
  return out;
}

/// (dU/dt, dB/dt) of incompressible MHD with the pressure eliminated by P.
inline IncompressibleState rhs_incompressible(const IncompressibleState& s, const PhysParams& p) {
  IncompressibleState r = nonlinear_incompressible(s, p);
  r.U.axpy(p.mu, laplacian(s.U));
  r.B.axpy(p.nu, laplacian(s.B));
  return r;
}

/// Pointwise k(a) = (1+a)^{gamma-1} - 1, dealiased.
inline SpectralField k_of_a(const SpectralField& a, const PressureLaw& law) {
  RealArray p = transform_inverse(a);
  for (double& x : p) {
    if (!(1.0 + x > 0.0)) throw SingularDensity("k_of_a: 1 + a <= 0 on the grid");
    x = law.k(x);
  }
  return dealias(transform_forward(p, a.grid()));
}

// ---------------------------------------------------------------------------
// Remainders. These follow the literal expressions of the (v, c) system and are
// only used as diagnostics.

namespace detail {

/// Physical-space helper for the remainder expressions: every term is formed
/// pointwise and dealiased once.
class TermBuilder {
 public:
  explicit TermBuilder(const GridSpec& g) : g_(g), spectral_(g) {}

  /// += coef(x) * (w . grad) z, where coef is a physical scalar (empty = 1).
  void add_advection(const RealArray* coef, const PhysVec& w, const PhysGrad& dz, double sign = 1.0) {
    RealArray tx(g_.size()), ty(g_.size());
    for (std::size_t i = 0; i < tx.size(); ++i) {
      const double c = coef ? (*coef)[i] : 1.0;
      tx[i] = c * (w.x[i] * dz.d[0][0][i] + w.y[i] * dz.d[0][1][i]);
      ty[i] = c * (w.x[i] * dz.d[1][0][i] + w.y[i] * dz.d[1][1][i]);
    }
    add_term(tx, ty, sign);
  }

  /// += s(x) * z(x) for a physical scalar s and vector z.
  void add_scaled(const RealArray& s, const PhysVec& z, double sign = 1.0) {
    RealArray tx(g_.size()), ty(g_.size());
    for (std::size_t i = 0; i < tx.size(); ++i) {
      tx[i] = s[i] * z.x[i];
      ty[i] = s[i] * z.y[i];
    }
    add_term(tx, ty, sign);
  }

  /// += an already-spectral vector term.
  void add_spectral(const VectorField& v, double sign = 1.0) { spectral_.axpy(sign, v); }

  const VectorField& result() const { return spectral_; }

 private:
  void add_term(const RealArray& tx, const RealArray& ty, double sign) {
    spectral_.axpy(sign, vec_from_phys(tx, ty, g_));
  }

  GridSpec g_;
  VectorField spectral_;
};

struct RemainderInputs {
  SpectralField a;
  VectorField U, B, v, c, Pv, Qv;
};

inline RemainderInputs remainder_inputs(const CompressibleState& comp, const IncompressibleState& inc) {
  if (!(comp.grid() == inc.grid())) throw InvalidArgument("remainder: states on different grids");
  RemainderInputs in{comp.a, inc.U, inc.B, comp.u - inc.U, comp.b - inc.B, VectorField(), VectorField()};
  in.Qv = project_Q(in.v);
  in.Pv = in.v - in.Qv;
  return in;
}

}  // namespace detail

/// R1 = (1+a)(v+U).grad Pv + (1+a)(v+U).grad U + a(v+U).grad Qv + k(a) grad a
///      - (B+c).grad(B+c) + grad|B+c|^2 / 2
inline VectorField remainder_R1(const CompressibleState& comp, const IncompressibleState& inc, const PhysParams& p) {
  const auto in = detail::remainder_inputs(comp, inc);
  const GridSpec& g = comp.grid();
  const PressureLaw law{p.gamma};
  const RealArray a = transform_inverse(in.a);
  RealArray one_a(a.size()), ka(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    one_a[i] = 1.0 + a[i];
    ka[i] = law.k(a[i]);
  }
  const auto w = detail::to_phys(in.v + in.U);
  const auto bc = detail::to_phys(in.B + in.c);
  detail::TermBuilder t(g);
  t.add_advection(&one_a, w, detail::phys_grad(in.Pv));
  t.add_advection(&one_a, w, detail::phys_grad(in.U));
  t.add_advection(&a, w, detail::phys_grad(in.Qv));
  t.add_scaled(ka, detail::to_phys(gradient(in.a)));
  t.add_advection(nullptr, bc, detail::phys_grad(in.B + in.c), -1.0);
  RealArray b2(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) b2[i] = bc.x[i] * bc.x[i] + bc.y[i] * bc.y[i];
  t.add_spectral(gradient(dealias(transform_forward(b2, g))), 0.5);
  return t.result();
}

/// R2 in its expanded form:
///   (1+a) Pv.grad(U+Qv) + (1+a) U.grad Qv + (1+a) Qv.grad U + a(v+U).grad Pv
///   + a U.grad U + a Qv.grad Qv - (B+c).grad c - c.grad B
inline VectorField remainder_R2(const CompressibleState& comp, const IncompressibleState& inc, const PhysParams&) {
  const auto in = detail::remainder_inputs(comp, inc);
  const GridSpec& g = comp.grid();
  const RealArray a = transform_inverse(in.a);
  RealArray one_a(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) one_a[i] = 1.0 + a[i];
  const auto Pv = detail::to_phys(in.Pv), Qv = detail::to_phys(in.Qv), U = detail::to_phys(in.U);
  const auto dQv = detail::phys_grad(in.Qv), dU = detail::phys_grad(in.U), dPv = detail::phys_grad(in.Pv);
  detail::TermBuilder t(g);
  t.add_advection(&one_a, Pv, detail::phys_grad(in.U + in.Qv));
  t.add_advection(&one_a, U, dQv);
  t.add_advection(&one_a, Qv, dU);
  t.add_advection(&a, detail::to_phys(in.v + in.U), dPv);
  t.add_advection(&a, U, dU);
  t.add_advection(&a, Qv, dQv);
  const auto dc = detail::phys_grad(in.c);
  t.add_advection(nullptr, detail::to_phys(in.B + in.c), dc, -1.0);
  t.add_advection(nullptr, detail::to_phys(in.c), detail::phys_grad(in.B), -1.0);
  return t.result();
}

/// R2 in its first (unexpanded) form:
///   (1+a)(v+U).grad Qv + (1+a) v.grad U + a(v+U).grad Pv + a U.grad U - (B+c).grad c - c.grad B.
/// Differs from remainder_R2 by the gradient Qv.grad Qv, so both agree after P.
inline VectorField remainder_R2_unexpanded(const CompressibleState& comp, const IncompressibleState& inc,
                                           const PhysParams&) {
  const auto in = detail::remainder_inputs(comp, inc);
  const GridSpec& g = comp.grid();
  const RealArray a = transform_inverse(in.a);
  RealArray one_a(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) one_a[i] = 1.0 + a[i];
  const auto w = detail::to_phys(in.v + in.U);
  const auto dU = detail::phys_grad(in.U);
  detail::TermBuilder t(g);
  t.add_advection(&one_a, w, detail::phys_grad(in.Qv));
  t.add_advection(&one_a, detail::to_phys(in.v), dU);
  t.add_advection(&a, w, detail::phys_grad(in.Pv));
  t.add_advection(&a, detail::to_phys(in.U), dU);
  t.add_advection(nullptr, detail::to_phys(in.B + in.c), detail::phys_grad(in.c), -1.0);
  t.add_advection(nullptr, detail::to_phys(in.c), detail::phys_grad(in.B), -1.0);
  return t.result();
}

/// R3 = (div Qv) B + (div Qv) c + v.grad B - (B+c).grad v - c.grad U
inline VectorField remainder_R3(const CompressibleState& comp, const IncompressibleState& inc, const PhysParams&) {
  const auto in = detail::remainder_inputs(comp, inc);
  const GridSpec& g = comp.grid();
  const RealArray divq = transform_inverse(divergence(in.Qv));
  const auto dv = detail::phys_grad(in.v);
  detail::TermBuilder t(g);
  t.add_scaled(divq, detail::to_phys(in.B));
  t.add_scaled(divq, detail::to_phys(in.c));
  t.add_advection(nullptr, detail::to_phys(in.v), detail::phys_grad(in.B));
  t.add_advection(nullptr, detail::to_phys(in.B + in.c), dv, -1.0);
  t.add_advection(nullptr, detail::to_phys(in.c), detail::phys_grad(in.U), -1.0);
  return t.result();
}

struct StateReport {
  double min_density = 0.0;
  double max_div_b = 0.0;      ///< max |div b|
  double rel_div_b = 0.0;      ///< max |div b| / max |b| (0 when b = 0)
  double mean_a = 0.0;
  double mean_drift = 0.0;     ///< |mean a - reference mean|
  bool density_ok = false;
  bool div_b_ok = false;
  bool mean_ok = false;
  bool finite = false;

  bool ok() const { return density_ok && div_b_ok && mean_ok && finite; }
};

/// Checks positivity of density, the div b = 0 constraint (relative 1e-10) and
/// conservation of the mean of a (1e-12).
inline StateReport validate_state(const CompressibleState& s, double reference_mean = 0.0) {
  StateReport r;
  const RealArray a = transform_inverse(s.a);
  r.finite = std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
  r.min_density = 1.0 + *std::min_element(a.begin(), a.end());
  r.max_div_b = max_abs(divergence(s.b));
  const double bmax = max_magnitude(s.b);
  r.rel_div_b = bmax > 0.0 ? r.max_div_b / bmax : r.max_div_b;
  r.mean_a = s.a.mean();
  r.mean_drift = std::abs(r.mean_a - reference_mean);
  r.density_ok = r.min_density > 0.0;
  r.div_b_ok = r.rel_div_b <= 1e-10;
  r.mean_ok = r.mean_drift <= 1e-12;
  return r;
}

}  // namespace bmhd
