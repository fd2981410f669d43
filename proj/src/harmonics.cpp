#include "sphneedlet/harmonics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "sphneedlet/errors.hpp"
#include "sphneedlet/parallel.hpp"

namespace sphneedlet {

UnitVector UnitVector::normalized(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!std::isfinite(n) || n == 0.0) throw DomainError("UnitVector: cannot normalize zero or non-finite vector");
  return {x / n, y / n, z / n};
}

UnitVector UnitVector::checked(double x, double y, double z, double tol) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!std::isfinite(n) || std::abs(n - 1.0) > tol)
    throw ValidationError("UnitVector: norm " + std::to_string(n) + " is not 1");
  return {x / n, y / n, z / n};
}

UnitVector UnitVector::from_angles(double theta, double phi) {
  return from_ring(std::cos(theta), phi);
}

UnitVector UnitVector::from_ring(double z, double phi) {
  if (!(z >= -1.0 && z <= 1.0)) throw DomainError("UnitVector: ring height outside [-1, 1]");
  const double s = std::sqrt((1.0 - z) * (1.0 + z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

double UnitVector::colatitude() const noexcept {
  return std::atan2(std::hypot(x_, y_), z_);
}

double UnitVector::distance(const UnitVector& o) const noexcept {
  return std::acos(std::clamp(dot(o), -1.0, 1.0));
}

std::uint64_t harmonic_dimension(int d, int l) {
  if (d < 2 || l < 0) throw DomainError("harmonic_dimension: requires d >= 2 and l >= 0");
  // C(l + d - 2, l) built multiplicatively; every prefix is itself a binomial coefficient.
  using u128 = unsigned __int128;
  u128 binom = 1;
  for (int i = 1; i <= d - 2; ++i) {
    binom = binom * static_cast<u128>(l + i) / static_cast<u128>(i);
    if (binom > std::numeric_limits<std::uint64_t>::max()) throw DomainError("harmonic_dimension: overflow");
  }
  const u128 z = binom * static_cast<u128>(2 * l + d - 1) / static_cast<u128>(d - 1);
  if (z > std::numeric_limits<std::uint64_t>::max()) throw DomainError("harmonic_dimension: overflow");
  return static_cast<std::uint64_t>(z);
}

double eigenvalue(int d, int l) {
  if (d < 2 || l < 0) throw DomainError("eigenvalue: requires d >= 2 and l >= 0");
  return static_cast<double>(l) * static_cast<double>(l + d - 1);
}

double sobolev_weight(double s, int l, int d) {
  return std::pow(1.0 + eigenvalue(d, l), s / 2.0);
}

namespace {

void require_unit_interval(double t, const char* who) {
  if (!(std::abs(t) <= 1.0)) throw DomainError(std::string(who) + ": argument outside [-1, 1]");
}

}  // namespace

double legendre_normalized(int l, double t) {
  if (l < 0) throw DomainError("legendre_normalized: negative degree");
  require_unit_interval(t, "legendre_normalized");
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int n = 2; n <= l; ++n) {
    const double p2 = ((2 * n - 1) * t * p1 - (n - 1) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

void legendre_table(int lmax, double t, std::span<double> out) {
  if (lmax < 0) return;
  require_unit_interval(t, "legendre_table");
  out[0] = 1.0;
  if (lmax >= 1) out[1] = t;
  for (int n = 2; n <= lmax; ++n) out[n] = ((2 * n - 1) * t * out[n - 1] - (n - 1) * out[n - 2]) / n;
}

double legendre_series(std::span<const double> coeffs, double t) {
  require_unit_interval(t, "legendre_series");
  if (coeffs.empty()) return 0.0;
  double sum = coeffs[0];
  double p0 = 1.0, p1 = t;
  for (std::size_t n = 1; n < coeffs.size(); ++n) {
    if (n >= 2) {
      const double p2 = ((2.0 * n - 1) * t * p1 - (n - 1.0) * p0) / static_cast<double>(n);
      p0 = p1;
      p1 = p2;
    }
    sum += coeffs[n] * p1;
  }
  return sum;
}

namespace {

// Recurrence coefficients of the fully normalized associated Legendre functions
//   Pbar_l^k = sqrt((2l+1)(l-k)!/(l+k)!) P_l^k,
// stored column-major in k.  offset(k) + (l - k) addresses Pbar_l^k.
class AlfTable {
 public:
  explicit AlfTable(int lmax) : lmax_(lmax), offset_(static_cast<std::size_t>(lmax) + 2) {
    offset_[0] = 0;
    for (int k = 0; k <= lmax; ++k) offset_[k + 1] = offset_[k] + static_cast<std::size_t>(lmax - k + 1);
    a_.resize(offset_[lmax + 1]);
    b_.resize(offset_[lmax + 1]);
    diag_.resize(static_cast<std::size_t>(lmax) + 1);
    for (int k = 0; k <= lmax; ++k) {
      diag_[k] = k == 0 ? 1.0 : std::sqrt((2.0 * k + 1.0) / (2.0 * k));
      for (int l = k + 2; l <= lmax; ++l) {
        const double ll = l, kk = k;
        a_[at(l, k)] = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - kk * kk));
        b_[at(l, k)] = std::sqrt(((ll - 1.0) * (ll - 1.0) - kk * kk) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
      }
    }
  }

  int lmax() const { return lmax_; }
  std::size_t size() const { return offset_[lmax_ + 1]; }
  std::size_t at(int l, int k) const { return offset_[k] + static_cast<std::size_t>(l - k); }

  /// Fills out (size()) with Pbar_l^k(z) for all 0 <= k <= l <= lmax.
  void fill(double z, std::span<double> out) const {
    const double s = std::sqrt(std::max(0.0, (1.0 - z) * (1.0 + z)));
    double pkk = 1.0;
    for (int k = 0; k <= lmax_; ++k) {
      if (k > 0) pkk *= diag_[k] * s;
      const std::size_t base = offset_[k];
      out[base] = pkk;
      if (k + 1 <= lmax_) out[base + 1] = std::sqrt(2.0 * k + 3.0) * z * pkk;
      for (int l = k + 2; l <= lmax_; ++l) {
        const std::size_t i = base + static_cast<std::size_t>(l - k);
        out[i] = a_[i] * (z * out[i - 1] - b_[i] * out[i - 2]);
      }
    }
  }

 private:
  int lmax_;
  std::vector<std::size_t> offset_;
  std::vector<double> a_, b_, diag_;
};

void fill_basis(const AlfTable& alf, std::span<const double> pbar, double phi, std::span<double> out) {
  const int lmax = alf.lmax();
  constexpr double sqrt2 = 1.4142135623730951;
  for (int l = 0; l <= lmax; ++l) out[harmonic_index(l, 1)] = pbar[alf.at(l, 0)];
  const double c1 = std::cos(phi), s1 = std::sin(phi);
  double ck = 1.0, sk = 0.0;
  for (int k = 1; k <= lmax; ++k) {
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
    for (int l = k; l <= lmax; ++l) {
      const double v = sqrt2 * pbar[alf.at(l, k)];
      out[harmonic_index(l, 2 * k)] = v * ck;
      out[harmonic_index(l, 2 * k + 1)] = v * sk;
    }
  }
}

// Point indices grouped by identical z; groups listed in ascending z.
std::vector<std::vector<std::size_t>> ring_groups(std::span<const UnitVector> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].z() < points[b].z(); });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || points[order[i]].z() != points[order[i - 1]].z()) groups.emplace_back();
    groups.back().push_back(order[i]);
  }
  return groups;
}

void require_lmax(int lmax, const char* who) {
  if (lmax < 0) throw DomainError(std::string(who) + ": negative degree");
}

}  // namespace

void sph_harm_basis(int lmax, const UnitVector& p, std::span<double> out) {
  require_lmax(lmax, "sph_harm_basis");
  if (out.size() < harmonic_count(lmax)) throw ValidationError("sph_harm_basis: output span too small");
  AlfTable alf(lmax);
  std::vector<double> pbar(alf.size());
  alf.fill(p.z(), pbar);
  fill_basis(alf, pbar, p.longitude(), out);
}

std::vector<double> sph_harm_basis(int lmax, const UnitVector& p) {
  require_lmax(lmax, "sph_harm_basis");
  std::vector<double> out(harmonic_count(lmax));
  sph_harm_basis(lmax, p, out);
  return out;
}

std::vector<double> evaluate_expansion(std::span<const double> coeffs, int lmax,
                                       std::span<const UnitVector> points) {
  require_lmax(lmax, "evaluate_expansion");
  if (coeffs.size() < harmonic_count(lmax))
    throw ValidationError("evaluate_expansion: coefficient vector shorter than (lmax+1)^2");
  std::vector<double> values(points.size(), 0.0);
  if (points.empty()) return values;
  const AlfTable alf(lmax);
  const auto groups = ring_groups(points);
  constexpr double sqrt2 = 1.4142135623730951;

  parallel_chunks(groups.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> pbar(alf.size());
    std::vector<double> fc(static_cast<std::size_t>(lmax) + 1), fs(static_cast<std::size_t>(lmax) + 1);
    for (std::size_t g = begin; g < end; ++g) {
      const auto& ring = groups[g];
      alf.fill(points[ring.front()].z(), pbar);
      // Collapse the degree sum: fc[k] = sum_l c_{l,2k} Pbar_l^k, likewise fs.
      for (int k = 0; k <= lmax; ++k) {
        double sc = 0.0, ss = 0.0;
        for (int l = k; l <= lmax; ++l) {
          const double p = pbar[alf.at(l, k)];
          if (k == 0) {
            sc += coeffs[harmonic_index(l, 1)] * p;
          } else {
            sc += coeffs[harmonic_index(l, 2 * k)] * p;
            ss += coeffs[harmonic_index(l, 2 * k + 1)] * p;
          }
        }
        fc[k] = k == 0 ? sc : sqrt2 * sc;
        fs[k] = sqrt2 * ss;
      }
      for (std::size_t idx : ring) {
        const double phi = points[idx].longitude();
        const double c1 = std::cos(phi), s1 = std::sin(phi);
        double ck = 1.0, sk = 0.0, v = fc[0];
        for (int k = 1; k <= lmax; ++k) {
          const double cn = ck * c1 - sk * s1;
          sk = sk * c1 + ck * s1;
          ck = cn;
          v += fc[k] * ck + fs[k] * sk;
        }
        values[idx] = v;
      }
    }
  });
  return values;
}

std::vector<double> project_weighted(std::span<const double> weights, int lmax,
                                     std::span<const UnitVector> points) {
  require_lmax(lmax, "project_weighted");
  if (weights.size() != points.size()) throw ValidationError("project_weighted: weight/point count mismatch");
  const std::size_t n = harmonic_count(lmax);
  if (points.empty()) return std::vector<double>(n, 0.0);
  const AlfTable alf(lmax);
  const auto groups = ring_groups(points);
  constexpr double sqrt2 = 1.4142135623730951;

  std::vector<std::vector<double>> partial(chunk_count(groups.size()), std::vector<double>(n, 0.0));
  parallel_chunks(groups.size(), [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    auto& acc = partial[chunk];
    std::vector<double> pbar(alf.size());
    std::vector<double> sc(static_cast<std::size_t>(lmax) + 1), ss(static_cast<std::size_t>(lmax) + 1);
    for (std::size_t g = begin; g < end; ++g) {
      const auto& ring = groups[g];
      std::fill(sc.begin(), sc.end(), 0.0);
      std::fill(ss.begin(), ss.end(), 0.0);
      for (std::size_t idx : ring) {
        const double w = weights[idx];
        const double phi = points[idx].longitude();
        const double c1 = std::cos(phi), s1 = std::sin(phi);
        double ck = 1.0, sk = 0.0;
        sc[0] += w;
        for (int k = 1; k <= lmax; ++k) {
          const double cn = ck * c1 - sk * s1;
          sk = sk * c1 + ck * s1;
          ck = cn;
          sc[k] += w * ck;
          ss[k] += w * sk;
        }
      }
      alf.fill(points[ring.front()].z(), pbar);
      for (int k = 0; k <= lmax; ++k) {
        const double a = k == 0 ? sc[0] : sqrt2 * sc[k];
        const double b = sqrt2 * ss[k];
        for (int l = k; l <= lmax; ++l) {
          const double p = pbar[alf.at(l, k)];
          if (k == 0) {
            acc[harmonic_index(l, 1)] += a * p;
          } else {
            acc[harmonic_index(l, 2 * k)] += a * p;
            acc[harmonic_index(l, 2 * k + 1)] += b * p;
          }
        }
      }
    }
  });
  std::vector<double> out = std::move(partial.front());
  for (std::size_t c = 1; c < partial.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) out[i] += partial[c][i];
  return out;
}

}  // namespace sphneedlet
