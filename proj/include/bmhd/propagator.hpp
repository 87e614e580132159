#pragma once

// Exact solution operators of the linear (stiff) parts and the phi functions
// needed by exponential time differencing.
//
// Per Fourier mode the compressible linear part decouples into
//   * the solenoidal velocity and the magnetic field: scalar decay rates -mu|k|^2, -nu|k|^2
//   * the acoustic pair (a, q = k.u/|k|):  a' = -i|k| q,  q' = -i|k| a - kappa |k|^2 q.
// With p = -i q the acoustic pair is real: (a, p)' = [[0, w], [-w, -c]] (a, p),
// w = |k|, c = kappa |k|^2.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "bmhd/error.hpp"
#include "bmhd/field.hpp"
#include "bmhd/mhd.hpp"
#include "bmhd/spectral.hpp"

namespace bmhd {

struct Mat2 {
  double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

  static Mat2 identity(double s = 1.0) {
    Mat2 r;
    r.m[0][0] = r.m[1][1] = s;
    return r;
  }
  double operator()(int i, int j) const { return m[i][j]; }
  double& operator()(int i, int j) { return m[i][j]; }
  double norm1() const {
    return std::max(std::abs(m[0][0]) + std::abs(m[1][0]), std::abs(m[0][1]) + std::abs(m[1][1]));
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return r;
  }
};

/// exp(Z), phi1(Z) = Z^{-1}(exp(Z) - I), phi2(Z) = Z^{-1}(phi1(Z) - I).
struct PhiSet {
  Mat2 e, phi1, phi2;
};

template <class T>
struct ScalarPhi {
  T e, phi1, phi2;
};

/// exp(z), phi1(z), phi2(z) for real or complex z, accurate near z = 0.
template <class T>
ScalarPhi<T> scalar_phi(T z) {
  if (std::abs(z) < 0.5) {
    // phi_l(z) = sum_k z^k / (k + l)!
    T e{1.0}, p1{1.0}, p2{0.5};
    T zk{1.0};
    double f0 = 1.0, f1 = 1.0, f2 = 2.0;
    for (int k = 1; k <= 30; ++k) {
      zk *= z;
      f0 *= k;
      f1 *= (k + 1);
      f2 *= (k + 2);
      e += zk / f0;
      p1 += zk / f1;
      p2 += zk / f2;
    }
    return {e, p1, p2};
  }
  const T e = std::exp(z);
  const T p1 = (e - T{1.0}) / z;
  return {e, p1, (p1 - T{1.0}) / z};
}

namespace detail {

using Mat6 = std::array<std::array<double, 6>, 6>;

inline Mat6 mul6(const Mat6& a, const Mat6& b) {
  Mat6 r{};
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 6; ++k) {
      if (a[i][k] == 0.0) continue;
      for (int j = 0; j < 6; ++j) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

/// exp of [[Z, I, 0], [0, 0, I], [0, 0, 0]] by scaling and squaring; the top
/// row of blocks is (exp Z, phi1 Z, phi2 Z).
inline PhiSet phi_augmented(const Mat2& z) {
  Mat6 m{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) m[i][j] = z(i, j);
    m[i][i + 2] = 1.0;
    m[i + 2][i + 4] = 1.0;
  }
  double norm = 0.0;
  for (int j = 0; j < 6; ++j) {
    double col = 0.0;
    for (int i = 0; i < 6; ++i) col += std::abs(m[i][j]);
    norm = std::max(norm, col);
  }
  const int s = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
  for (auto& row : m)
    for (double& x : row) x = std::ldexp(x, -s);
  Mat6 sum{}, term{};
  for (int i = 0; i < 6; ++i) sum[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 20; ++k) {
    term = mul6(term, m);
    for (auto& row : term)
      for (double& x : row) x /= k;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) sum[i][j] += term[i][j];
  }
  for (int i = 0; i < s; ++i) sum = mul6(sum, sum);
  PhiSet r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      r.e(i, j) = sum[i][j];
      r.phi1(i, j) = sum[i][j + 2];
      r.phi2(i, j) = sum[i][j + 4];
    }
  return r;
}

inline PhiSet phi_taylor(const Mat2& z) {
  PhiSet r{Mat2::identity(), Mat2::identity(), Mat2::identity(0.5)};
  Mat2 zk = Mat2::identity();
  double f0 = 1.0, f1 = 1.0, f2 = 2.0;
  for (int k = 1; k <= 30; ++k) {
    zk = zk * z;
    f0 *= k;
    f1 *= (k + 1);
    f2 *= (k + 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        r.e(i, j) += zk(i, j) / f0;
        r.phi1(i, j) += zk(i, j) / f1;
        r.phi2(i, j) += zk(i, j) / f2;
      }
  }
  return r;
}

/// Z - lam I, with each diagonal entry taken from whichever of Z_ii - lam and
/// lam_other - Z_jj (equal by the trace identity) involves smaller operands.
inline std::array<std::array<std::complex<double>, 2>, 2> shifted(const Mat2& z, std::complex<double> lam,
                                                                  std::complex<double> other) {
  std::array<std::array<std::complex<double>, 2>, 2> r{};
  r[0][1] = z(0, 1);
  r[1][0] = z(1, 0);
  for (int i = 0; i < 2; ++i) {
    const double zi = z(i, i), zj = z(1 - i, 1 - i);
    const double direct = std::max(std::abs(zi), std::abs(lam));
    const double swapped = std::max(std::abs(zj), std::abs(other));
    r[i][i] = direct <= swapped ? std::complex<double>(zi) - lam : other - std::complex<double>(zj);
  }
  return r;
}

}  // namespace detail

/// exp(Z), phi1(Z), phi2(Z) for a real 2x2 matrix.
///
/// Small Z uses Taylor series; well separated eigenvalues use the two-point
/// interpolation f(Z) = [f(l1)(Z - l2) - f(l2)(Z - l1)] / (l1 - l2), which stays
/// accurate for very stiff blocks; nearly coincident eigenvalues fall back to
/// the exponential of an augmented 6x6 matrix.
inline PhiSet phi_functions(const Mat2& z) {
  if (z.norm1() <= 1.0) return detail::phi_taylor(z);
  using C = std::complex<double>;
  const double tr = z(0, 0) + z(1, 1);
  const double det = z(0, 0) * z(1, 1) - z(0, 1) * z(1, 0);
  const double disc = 0.25 * tr * tr - det;
  C l1, l2;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double big = tr >= 0.0 ? 0.5 * tr + s : 0.5 * tr - s;
    l1 = big;
    l2 = big != 0.0 ? det / big : 0.0;
  } else {
    const double w = std::sqrt(-disc);
    l1 = C(0.5 * tr, w);
    l2 = C(0.5 * tr, -w);
  }
  const double scale = std::max(std::abs(l1), std::abs(l2));
  if (!(std::abs(l1 - l2) >= 0.1 * scale)) return detail::phi_augmented(z);
  const auto f1 = scalar_phi(l1), f2 = scalar_phi(l2);
  const auto z2 = detail::shifted(z, l2, l1);  // Z - l2 I
  const auto z1 = detail::shifted(z, l1, l2);  // Z - l1 I
  const C inv = C(1.0) / (l1 - l2);
  PhiSet r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      r.e(i, j) = ((f1.e * z2[i][j] - f2.e * z1[i][j]) * inv).real();
      r.phi1(i, j) = ((f1.phi1 * z2[i][j] - f2.phi1 * z1[i][j]) * inv).real();
      r.phi2(i, j) = ((f1.phi2 * z2[i][j] - f2.phi2 * z1[i][j]) * inv).real();
    }
  return r;
}

/// Real acoustic generator [[0, w], [-w, -c]] times dt.
inline Mat2 acoustic_generator(double w, double c, double dt) {
  Mat2 z;
  z(0, 1) = w * dt;
  z(1, 0) = -w * dt;
  z(1, 1) = -c * dt;
  return z;
}

/// exp(dt A) for the real acoustic block; c = 0 and negative dt are allowed.
inline Mat2 acoustic_exponential(double w, double c, double dt) {
  if (w < 0.0 || c < 0.0) throw InvalidArgument("acoustic_exponential: w and c must be >= 0");
  return phi_functions(acoustic_generator(w, c, dt)).e;
}

/// Mode-wise linear propagators for one (grid, params, dt), tabulated by |k|^2.
class LinearPropagator {
 public:
  enum class Kind { exp = 0, phi1 = 1, phi2 = 2 };

  LinearPropagator(const GridSpec& g, const PhysParams& p, double dt) : grid_(g), params_(p), dt_(dt) {
    p.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("LinearPropagator: dt must be positive and finite");
    const int n = g.n;
    const double k0 = g.k0();
    table_.assign(static_cast<std::size_t>(n) * n / 2 + 1, Entry{});
    for_each_mode(g, [&](std::size_t, int kx, int ky) {
      const int ex = derivative_wavenumber(g, kx), ey = derivative_wavenumber(g, ky);
      const std::size_t m = static_cast<std::size_t>(ex * ex + ey * ey);
      if (table_[m].ready) return;
      const double k2 = k0 * k0 * static_cast<double>(m);
      Entry& e = table_[m];
      e.acoustic = phi_functions(acoustic_generator(std::sqrt(k2), p.kappa() * k2, dt));
      e.mu = scalar_phi(-p.mu * k2 * dt);
      e.nu = scalar_phi(-p.nu * k2 * dt);
      e.ready = true;
    });
  }

  double dt() const { return dt_; }
  const GridSpec& grid() const { return grid_; }
  const PhysParams& params() const { return params_; }

  /// Applies exp(dt L), phi1(dt L) or phi2(dt L) to a compressible state.
  CompressibleState apply(Kind kind, const CompressibleState& s) const {
    CompressibleState out = CompressibleState::zero(grid_);
    out.t = s.t;
    const double k0 = grid_.k0();
    for_each_mode(grid_, [&](std::size_t idx, int kx, int ky) {
      const int ex = derivative_wavenumber(grid_, kx), ey = derivative_wavenumber(grid_, ky);
      const Entry& e = table_[static_cast<std::size_t>(ex * ex + ey * ey)];
      const Mat2& m = pick(e.acoustic, kind);
      const double smu = pick(e.mu, kind), snu = pick(e.nu, kind);
      out.b[0][idx] = snu * s.b[0][idx];
      out.b[1][idx] = snu * s.b[1][idx];
      if (ex == 0 && ey == 0) {
        out.a[idx] = m(0, 0) * s.a[idx];
        out.u[0][idx] = m(0, 0) * s.u[0][idx];
        out.u[1][idx] = m(0, 0) * s.u[1][idx];
        return;
      }
      const double kk = k0 * std::sqrt(static_cast<double>(ex * ex + ey * ey));
      const double hx = k0 * ex / kk, hy = k0 * ey / kk;
      const cplx a = s.a[idx], ux = s.u[0][idx], uy = s.u[1][idx];
      const cplx q = hx * ux + hy * uy;
      const cplx px = ux - q * hx, py = uy - q * hy;
      const cplx I(0.0, 1.0);
      // (a, p) real form with p = -i q.
      const cplx a_new = m(0, 0) * a - I * m(0, 1) * q;
      const cplx q_new = I * m(1, 0) * a + m(1, 1) * q;
      out.a[idx] = a_new;
      out.u[0][idx] = smu * px + q_new * hx;
      out.u[1][idx] = smu * py + q_new * hy;
    });
    return out;
  }

  /// Same for the incompressible system (linear part mu Lap U, nu Lap B).
  IncompressibleState apply(Kind kind, const IncompressibleState& s) const {
    IncompressibleState out = IncompressibleState::zero(grid_);
    out.t = s.t;
    for_each_mode(grid_, [&](std::size_t idx, int kx, int ky) {
      const int ex = derivative_wavenumber(grid_, kx), ey = derivative_wavenumber(grid_, ky);
      const Entry& e = table_[static_cast<std::size_t>(ex * ex + ey * ey)];
      const double smu = pick(e.mu, kind), snu = pick(e.nu, kind);
      for (int i = 0; i < 2; ++i) {
        out.U[i][idx] = smu * s.U[i][idx];
        out.B[i][idx] = snu * s.B[i][idx];
      }
    });
    return out;
  }

 private:
  struct Entry {
    PhiSet acoustic;
    ScalarPhi<double> mu{}, nu{};
    bool ready = false;
  };

  static const Mat2& pick(const PhiSet& p, Kind k) {
    return k == Kind::exp ? p.e : (k == Kind::phi1 ? p.phi1 : p.phi2);
  }
  static double pick(const ScalarPhi<double>& p, Kind k) {
    return k == Kind::exp ? p.e : (k == Kind::phi1 ? p.phi1 : p.phi2);
  }

  GridSpec grid_;
  PhysParams params_;
  double dt_;
  std::vector<Entry> table_;
};

}  // namespace bmhd
