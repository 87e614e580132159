#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "bmhd/error.hpp"
#include "bmhd/grid.hpp"

namespace bmhd {

using cplx = std::complex<double>;
using RealArray = std::vector<double>;

/// Fourier coefficients of a real scalar field on the d-torus.
///
/// Coefficients are stored in FFT order (row-major over axes, index i maps to
/// wavenumber i for i <= n/2 and i - n otherwise) and normalized so that the
/// zero mode equals the spatial mean.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const GridSpec& grid) : grid_(grid), c_(grid.size()) {}
  SpectralField(const GridSpec& grid, std::vector<cplx> coeffs) : grid_(grid), c_(std::move(coeffs)) {
    if (c_.size() != grid_.size()) throw InvalidArgument("SpectralField: coefficient count does not match grid");
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return c_.size(); }
  std::span<cplx> coeffs() { return c_; }
  std::span<const cplx> coeffs() const { return c_; }

  cplx& operator[](std::size_t idx) { return c_[idx]; }
  const cplx& operator[](std::size_t idx) const { return c_[idx]; }

  /// Coefficient at integer wavevector (kx, ky); indices are reduced mod n.
  cplx& at(int kx, int ky) { return c_[flat(kx, ky)]; }
  const cplx& at(int kx, int ky) const { return c_[flat(kx, ky)]; }

  double mean() const { return c_.empty() ? 0.0 : c_[0].real(); }

  SpectralField& operator+=(const SpectralField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

  /// Largest |c(-k) - conj(c(k))| over all modes.
  double hermitian_defect() const {
    const int n = grid_.n;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(c_[flat(-i, -j)] - std::conj(c_[flat(i, j)])));
    return worst;
  }

 private:
  std::size_t flat(int kx, int ky) const {
    return static_cast<std::size_t>(grid_.index_of(kx)) * grid_.n + grid_.index_of(ky);
  }
  void check_same(const SpectralField& o) const {
    if (!(grid_ == o.grid_)) throw InvalidArgument("SpectralField: grid mismatch");
  }

  GridSpec grid_;
  std::vector<cplx> c_;
};

/// d spectral components sharing one grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const GridSpec& grid) : comps_(grid.d, SpectralField(grid)) {}
  explicit VectorField(std::vector<SpectralField> comps) : comps_(std::move(comps)) {
    if (comps_.empty()) throw InvalidArgument("VectorField: no components");
    for (const auto& c : comps_)
      if (!(c.grid() == comps_.front().grid())) throw InvalidArgument("VectorField: components on different grids");
  }

  const GridSpec& grid() const { return comps_.front().grid(); }
  int dim() const { return static_cast<int>(comps_.size()); }
  SpectralField& operator[](int i) { return comps_[i]; }
  const SpectralField& operator[](int i) const { return comps_[i]; }
  auto begin() { return comps_.begin(); }
  auto end() { return comps_.end(); }
  auto begin() const { return comps_.begin(); }
  auto end() const { return comps_.end(); }

  VectorField& operator+=(const VectorField& o) {
    for (int i = 0; i < dim(); ++i) comps_[i] += o.comps_[i];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    for (int i = 0; i < dim(); ++i) comps_[i] -= o.comps_[i];
    return *this;
  }
  VectorField& operator*=(double s) {
    for (auto& c : comps_) c *= s;
    return *this;
  }
  VectorField& axpy(double s, const VectorField& o) {
    for (int i = 0; i < dim(); ++i) comps_[i].axpy(s, o.comps_[i]);
    return *this;
  }

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

 private:
  std::vector<SpectralField> comps_;
};

}  // namespace bmhd
