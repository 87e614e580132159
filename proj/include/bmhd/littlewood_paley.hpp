#pragma once

// Homogeneous Littlewood-Paley decomposition on the torus, Besov norms built
// on it, and empirical checkers for the product, composition and
// interpolation estimates in those norms.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "bmhd/error.hpp"
#include "bmhd/field.hpp"
#include "bmhd/spectral.hpp"

namespace bmhd {

/// Smooth radial cutoff phi and the dyadic block range resolving a grid.
///
/// chi is a C-infinity step equal to 1 on |xi| <= 3/4 and 0 on |xi| >= 4/3, and
/// phi(xi) = chi(xi/2) - chi(xi), so phi(2^-j .) is supported in 2^j [3/4, 8/3]
/// and the sum over j telescopes to 1 away from the origin.
class DyadicProfile {
 public:
  explicit DyadicProfile(const GridSpec& grid) : grid_(grid) {
    grid.validate();
    detail::require_2d(grid, "DyadicProfile");
    const double xi_min = grid.k0();
    const double xi_max = grid.k0() * std::sqrt(static_cast<double>(grid.d)) * (grid.n / 2);
    // chi(2^-jmin xi) = 0 and chi(2^-(jmax+1) xi) = 1 on every nonzero grid mode.
    j_min_ = static_cast<int>(std::floor(std::log2(0.75 * xi_min)));
    j_max_ = static_cast<int>(std::ceil(std::log2(xi_max / 0.75 / 2.0)));
    build_weights();
  }

  static double chi(double r) {
    if (r <= 0.75) return 1.0;
    if (r >= 4.0 / 3.0) return 0.0;
    const double a = bump(4.0 / 3.0 - r), b = bump(r - 0.75);
    return a / (a + b);
  }

  /// phi at radius r (times the fault-injection scale, 1 for a real profile).
  double phi(double r) const { return scale_ * (chi(0.5 * r) - chi(r)); }
  /// phi(2^-j xi).
  double multiplier(int j, double xi) const { return phi(std::ldexp(xi, -j)); }

  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  int block_count() const { return j_max_ - j_min_ + 1; }
  const GridSpec& grid() const { return grid_; }

  /// Physical radial wavenumber |2 pi k / L| of a flat mode index.
  double xi(std::size_t idx) const { return xi_[idx]; }

  /// Per-mode cache: the first contributing block and the weights of it and the next block.
  int first_block(std::size_t idx) const { return j_lo_[idx]; }
  double weight_lo(std::size_t idx) const { return w_lo_[idx]; }
  double weight_hi(std::size_t idx) const { return w_hi_[idx]; }

  /// Weight of block j at mode idx (0 when j does not touch the mode).
  double weight(int j, std::size_t idx) const {
    if (j == j_lo_[idx]) return w_lo_[idx];
    if (j == j_lo_[idx] + 1) return w_hi_[idx];
    return 0.0;
  }

  /// Copy with phi multiplied by `factor`; used to inject faults into property checks.
  DyadicProfile scaled(double factor) const {
    DyadicProfile p = *this;
    p.scale_ *= factor;
    p.build_weights();
    return p;
  }

 private:
  static double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

  void build_weights() {
    const std::size_t sz = grid_.size();
    xi_.assign(sz, 0.0);
    j_lo_.assign(sz, j_min_);
    w_lo_.assign(sz, 0.0);
    w_hi_.assign(sz, 0.0);
    const double k0 = grid_.k0();
    for_each_mode(grid_, [&](std::size_t idx, int kx, int ky) {
      const double xi = k0 * std::sqrt(static_cast<double>(kx) * kx + static_cast<double>(ky) * ky);
      xi_[idx] = xi;
      if (xi == 0.0) return;
      // Support of phi(2^-j .) is 2^j [3/4, 8/3]: the lowest contributing j satisfies 2^j > 3 xi / 8.
      int j = static_cast<int>(std::floor(std::log2(3.0 * xi / 8.0))) + 1;
      while (j > j_min_ && multiplier(j - 1, xi) != 0.0) --j;
      while (multiplier(j, xi) == 0.0 && j < j_max_) ++j;
      j = std::max(j, j_min_);
      j_lo_[idx] = j;
      w_lo_[idx] = j <= j_max_ ? multiplier(j, xi) : 0.0;
      w_hi_[idx] = j + 1 <= j_max_ ? multiplier(j + 1, xi) : 0.0;
    });
  }

  GridSpec grid_;
  int j_min_ = 0, j_max_ = 0;
  double scale_ = 1.0;
  std::vector<double> xi_;
  std::vector<int> j_lo_;
  std::vector<double> w_lo_, w_hi_;
};

inline DyadicProfile build_profile(const GridSpec& grid) { return DyadicProfile(grid); }

/// Applies the multiplier sum_j g(j) phi(2^-j D) to f.
inline SpectralField apply_block_weights(const SpectralField& f, const DyadicProfile& profile,
                                         const std::function<double(int)>& g) {
  SpectralField out(f.grid());
  std::map<int, double> cache;
  auto gj = [&](int j) {
    auto it = cache.find(j);
    if (it != cache.end()) return it->second;
    const double v = (j >= profile.j_min() && j <= profile.j_max()) ? g(j) : 0.0;
    cache.emplace(j, v);
    return v;
  };
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (profile.xi(i) == 0.0) continue;
    const int j = profile.first_block(i);
    const double w = gj(j) * profile.weight_lo(i) + gj(j + 1) * profile.weight_hi(i);
    out[i] = w * f[i];
  }
  return out;
}

/// Delta_j f. Blocks outside [j_min, j_max] are identically zero.
inline SpectralField lp_block(const SpectralField& f, int j, const DyadicProfile& profile) {
  return apply_block_weights(f, profile, [j](int k) { return k == j ? 1.0 : 0.0; });
}

/// S_j f = sum_{k <= j-1} Delta_k f.
inline SpectralField lp_lowpass(const SpectralField& f, int j, const DyadicProfile& profile) {
  return apply_block_weights(f, profile, [j](int k) { return k <= j - 1 ? 1.0 : 0.0; });
}

struct LPDecomposition {
  std::map<int, SpectralField> blocks;
  const DyadicProfile* profile = nullptr;

  SpectralField reconstruct() const {
    SpectralField sum(profile->grid());
    for (const auto& [j, b] : blocks) sum += b;
    return sum;
  }
};

inline LPDecomposition decompose(const SpectralField& f, const DyadicProfile& profile) {
  LPDecomposition d;
  d.profile = &profile;
  for (int j = profile.j_min(); j <= profile.j_max(); ++j) d.blocks.emplace(j, lp_block(f, j, profile));
  return d;
}

/// Regularity s, Lebesgue exponent p (only 2 is supported) and summation exponent r.
struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double r = 1.0;

  static constexpr double inf = std::numeric_limits<double>::infinity();

  void validate() const {
    if (p != 2.0) throw InvalidArgument("besov_norm: only p = 2 is supported");
    if (!(r == 1.0 || r == 2.0 || r == inf)) throw InvalidArgument("besov_norm: r must be 1, 2 or infinity");
  }
};

/// ||Delta_j f||_{L2} for j = j_min .. j_max (index j - j_min), via Parseval.
inline std::vector<double> block_norms(const SpectralField& f, const DyadicProfile& profile) {
  std::vector<double> sq(profile.block_count() + 1, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (profile.xi(i) == 0.0) continue;
    const double m2 = std::norm(f[i]);
    const int b = profile.first_block(i) - profile.j_min();
    sq[b] += profile.weight_lo(i) * profile.weight_lo(i) * m2;
    sq[b + 1] += profile.weight_hi(i) * profile.weight_hi(i) * m2;
  }
  sq.pop_back();
  const double vol = f.grid().volume();
  for (auto& v : sq) v = std::sqrt(v * vol);
  return sq;
}

/// Per-block Euclidean norm across components.
inline std::vector<double> block_norms(const VectorField& v, const DyadicProfile& profile) {
  std::vector<double> sum(profile.block_count(), 0.0);
  for (const auto& c : v) {
    const auto b = block_norms(c, profile);
    for (std::size_t i = 0; i < b.size(); ++i) sum[i] += b[i] * b[i];
  }
  for (auto& x : sum) x = std::sqrt(x);
  return sum;
}

/// l^r sum of 2^{js} * block_norms[j].
inline double besov_from_blocks(const std::vector<double>& blocks, int j_min, const BesovIndex& idx) {
  idx.validate();
  double acc = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const double term = std::exp2(idx.s * (j_min + static_cast<int>(b))) * blocks[b];
    if (idx.r == 1.0) acc += term;
    else if (idx.r == 2.0) acc += term * term;
    else acc = std::max(acc, term);
  }
  return idx.r == 2.0 ? std::sqrt(acc) : acc;
}

inline double besov_norm(const SpectralField& f, const BesovIndex& idx, const DyadicProfile& profile) {
  idx.validate();
  return besov_from_blocks(block_norms(f, profile), profile.j_min(), idx);
}

inline double besov_norm(const VectorField& v, const BesovIndex& idx, const DyadicProfile& profile) {
  idx.validate();
  return besov_from_blocks(block_norms(v, profile), profile.j_min(), idx);
}

/// ||f||_{B^s_{2,1}}, the norm used throughout the diagnostics.
template <class Field>
double besov21(const Field& f, double s, const DyadicProfile& profile) {
  return besov_norm(f, BesovIndex{s, 2.0, 1.0}, profile);
}

/// (f^l, f^h): blocks with 2^j kappa <= 1 go to the low part, the rest to the high part.
inline std::pair<SpectralField, SpectralField> low_high_split(const SpectralField& f, double kappa,
                                                              const DyadicProfile& profile) {
  if (!(kappa > 0.0)) throw InvalidArgument("low_high_split: kappa must be > 0");
  auto is_low = [kappa](int j) { return std::ldexp(kappa, j) <= 1.0; };
  return {apply_block_weights(f, profile, [&](int j) { return is_low(j) ? 1.0 : 0.0; }),
          apply_block_weights(f, profile, [&](int j) { return is_low(j) ? 0.0 : 1.0; })};
}

/// ||fg||_{B^{s1+s2-d/2}} / (||f||_{B^{s1}} ||g||_{B^{s2}}), all B_{2,1}.
inline double check_product(const SpectralField& f, const SpectralField& g, double s1, double s2,
                            const DyadicProfile& profile) {
  const double half_d = 0.5 * f.grid().d;
  if (s1 > half_d || s2 > half_d || !(s1 + s2 > 0.0))
    throw InvalidArgument("check_product: need s1, s2 <= d/2 and s1 + s2 > 0");
  const double den = besov21(f, s1, profile) * besov21(g, s2, profile);
  if (!(den > 0.0)) throw InvalidArgument("check_product: zero denominator");
  return besov21(product(f, g), s1 + s2 - half_d, profile) / den;
}

/// ||f||_{B^{theta s1 + (1-theta) s2}} / (||f||^theta_{B^{s1}} ||f||^{1-theta}_{B^{s2}}).
inline double check_interpolation(const SpectralField& f, double s1, double s2, double theta,
                                  const DyadicProfile& profile) {
  if (s1 == s2) throw InvalidArgument("check_interpolation: need s1 != s2");
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("check_interpolation: theta must lie in (0, 1)");
  const double n1 = besov21(f, s1, profile), n2 = besov21(f, s2, profile);
  if (!(n1 > 0.0 && n2 > 0.0)) throw InvalidArgument("check_interpolation: zero norm");
  return besov21(f, theta * s1 + (1.0 - theta) * s2, profile) / (std::pow(n1, theta) * std::pow(n2, 1.0 - theta));
}

/// Pointwise F(x) = (1 + x)^{gamma-1} - 1 applied in physical space, then dealiased.
inline SpectralField compose_pressure_deviation(const SpectralField& f, double gamma) {
  RealArray p = transform_inverse(f);
  for (double& x : p) {
    if (!(x > -1.0)) throw SingularDensity("composition: argument <= -1 somewhere on the grid");
    x = std::pow(1.0 + x, gamma - 1.0) - 1.0;
  }
  return dealias(transform_forward(p, f.grid()));
}

/// ||F(f)||_{B^s_{2,1}} / ||f||_{B^s_{2,1}} with F(x) = (1+x)^{gamma-1} - 1; 0 for f = 0.
inline double check_composition(const SpectralField& f, double s, double gamma, const DyadicProfile& profile) {
  const SpectralField F = compose_pressure_deviation(f, gamma);
  const double den = besov21(f, s, profile);
  if (den == 0.0) return 0.0;
  return besov21(F, s, profile) / den;
}

}  // namespace bmhd
