#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <vector>

#include "sphneedlet/harmonics.hpp"

namespace sphneedlet {

/// A_l = 1 / (1 + delta l)^(2s + 2) for 0 <= l <= M.
class AngularPowerSpectrum {
 public:
  AngularPowerSpectrum(double delta, double s, int truncation);

  double delta() const { return delta_; }
  double smoothness() const { return s_; }
  int truncation() const { return M_; }

  /// Throws DomainError when l is negative or beyond the truncation.
  double operator()(int l) const;

  /// Pointwise variance sum_l (2l+1) A_l.
  double variance() const;
  /// E ||T||^2_{H^s} for a centred field: sum_{l <= M} (1 + lambda_l)^s (2l+1) A_l.
  double expected_sobolev_norm_sq(double sobolev_s) const;

 private:
  double delta_, s_;
  int M_;
};

inline double aps_eval(const AngularPowerSpectrum& spec, int l) { return spec(l); }

/// One realisation's Karhunen-Loeve coefficients a_{l,m}, l <= M, in harmonic_index order.
struct FieldSample {
  int truncation = 0;
  double mu0 = 0.0;
  double delta = 0.0;
  double s = 0.0;
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::vector<double> coefficients;

  double& at(int l, int m) { return coefficients.at(harmonic_index(l, m)); }
  double at(int l, int m) const { return coefficients.at(harmonic_index(l, m)); }

  /// Zero coefficients of degree <= M.
  static FieldSample zeros(int truncation);
};

/// Draws a_{l,m} ~ Normal(0, A_l) for l >= 1 and a_{0,1} ~ Normal(mu0, A_0), independent.
///
/// Draw order is degree-major, order-minor (flat harmonic_index order) from a
/// std::mt19937_64 seeded with `seed`.  `scale` multiplies every standard deviation.
FieldSample sample_field(const AngularPowerSpectrum& spec, std::uint64_t seed, double mu0 = 0.0, double scale = 1.0);

/// Seed for realisation n of a study, derived from the master seed.
std::uint64_t realisation_seed(std::uint64_t master, std::uint64_t n);

/// T(p) = sum_{l,m} a_{l,m} Y_{l,m}(p).
std::vector<double> eval_field(const FieldSample& sample, std::span<const UnitVector> points);

/// G(t) = sum_{l <= M} A_l (2l+1) P_l(t).
double covariance_value(const AngularPowerSpectrum& spec, double t);

/// sum_{l,m} (1 + lambda_l)^s a_{l,m}^2.
double sobolev_norm_sq(const FieldSample& sample, double s);

/// Cosine cap of radius r about a centre: cos(pi/2 * dist / r) inside, 0 outside.
struct CosineCap {
  UnitVector center;
  double radius = std::numbers::pi / 3.0;

  CosineCap() = default;
  /// Throws DomainError unless 0 < radius <= pi.
  CosineCap(const UnitVector& c, double r);

  double operator()(const UnitVector& p) const;
};

inline double ccap_eval(const CosineCap& cap, const UnitVector& p) { return cap(p); }

/// T(p) + f_ccap(p).
std::vector<double> composite_field(const FieldSample& sample, const CosineCap& cap,
                                    std::span<const UnitVector> points);

/// CSV: header `mu0,delta,s,M,seed` and its values, then `l,m,a` rows.
void save_field_sample(const FieldSample& sample, const std::filesystem::path& path);
FieldSample load_field_sample(const std::filesystem::path& path);

}  // namespace sphneedlet
