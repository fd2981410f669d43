#pragma once

// Zonal and spherical harmonics on S^2.
//
// Every inner product in this library is taken with respect to the
// normalized surface measure sigma_2 (total mass 1).  Under that measure
// Y_{0,1} == 1 and the addition theorem reads
//
//     sum_m Y_{l,m}(p) Y_{l,m}(q) = (2l+1) P_l(p.q).
//
// To convert to the common unnormalized convention (measure of total mass
// 4 pi) divide every Y_{l,m} by sqrt(4 pi).
//
// Real basis ordering for degree l, with 1-based order index m:
//   m = 1        -> sqrt(2l+1)  Pbar_l^0(cos theta)
//   m = 2k       -> sqrt(2(2l+1)(l-k)!/(l+k)!) P_l^k(cos theta) cos(k phi),  k = 1..l
//   m = 2k + 1   -> sqrt(2(2l+1)(l-k)!/(l+k)!) P_l^k(cos theta) sin(k phi),  k = 1..l
// without the Condon-Shortley phase.  The flat index of (l, m) is l*l + m - 1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sphneedlet {

class UnitVector {
 public:
  /// North pole.
  constexpr UnitVector() = default;

  /// Normalizes (x, y, z); throws DomainError for the zero vector or non-finite input.
  static UnitVector normalized(double x, double y, double z);
  /// Accepts (x, y, z) only when | |v| - 1 | <= tol; the stored vector is renormalized.
  static UnitVector checked(double x, double y, double z, double tol = 1e-8);
  /// Colatitude theta in [0, pi], longitude phi.  Stores z = cos(theta) exactly as computed.
  static UnitVector from_angles(double theta, double phi);
  /// Builds from a precomputed ring height z and longitude; points sharing z share a ring.
  static UnitVector from_ring(double z, double phi);

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double z() const noexcept { return z_; }

  double dot(const UnitVector& o) const noexcept { return x_ * o.x_ + y_ * o.y_ + z_ * o.z_; }
  double colatitude() const noexcept;
  double longitude() const noexcept { return std::atan2(y_, x_); }
  /// arccos of the clamped inner product.
  double distance(const UnitVector& o) const noexcept;

 private:
  constexpr UnitVector(double x, double y, double z) : x_(x), y_(y), z_(z) {}
  double x_ = 0.0, y_ = 0.0, z_ = 1.0;
};

/// Z(d, l), exact.  Throws DomainError for d < 2, l < 0 or if the value overflows 64 bits.
std::uint64_t harmonic_dimension(int d, int l);

/// lambda_l = l (l + d - 1).
double eigenvalue(int d, int l);

/// b_l^(s) = (1 + lambda_l)^(s/2).
double sobolev_weight(double s, int l, int d = 2);

/// Legendre polynomial on S^2 with P_l(1) = 1, by three-term recurrence.
double legendre_normalized(int l, double t);

/// P_0(t) .. P_lmax(t) into out (size lmax + 1).
void legendre_table(int lmax, double t, std::span<double> out);

/// sum_l coeffs[l] P_l(t) with a single recurrence sweep.
double legendre_series(std::span<const double> coeffs, double t);

constexpr std::size_t harmonic_count(int lmax) {
  return static_cast<std::size_t>(lmax + 1) * static_cast<std::size_t>(lmax + 1);
}
constexpr std::size_t harmonic_index(int l, int m) {
  return static_cast<std::size_t>(l) * static_cast<std::size_t>(l) + static_cast<std::size_t>(m - 1);
}

/// All Y_{l,m}(p) for l <= lmax in flat order; size (lmax+1)^2.
std::vector<double> sph_harm_basis(int lmax, const UnitVector& p);
void sph_harm_basis(int lmax, const UnitVector& p, std::span<double> out);

/// values[i] = sum_{l <= lmax, m} coeffs[l,m] Y_{l,m}(points[i]).
///
/// Points with bitwise-identical z share one associated-Legendre sweep, so
/// ring-structured point sets (tensor rules, lat-lon grids) cost
/// O(rings * lmax^2 + points * lmax) instead of O(points * lmax^2).
std::vector<double> evaluate_expansion(std::span<const double> coeffs, int lmax,
                                       std::span<const UnitVector> points);

/// out[l,m] = sum_i weights[i] Y_{l,m}(points[i]), the adjoint of evaluate_expansion.
std::vector<double> project_weighted(std::span<const double> weights, int lmax,
                                     std::span<const UnitVector> points);

}  // namespace sphneedlet
