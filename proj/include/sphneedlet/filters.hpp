#pragma once

#include <functional>
#include <vector>

namespace sphneedlet {

/// A scalar filter g on [0, inf) that vanishes beyond support_end.
struct ScalarFilter {
  std::function<double(double)> eval;
  double support_end = 2.0;

  double operator()(double t) const { return eval(t); }
};

/// Needlet filter h in C^kappa with supp h = [1/2, 2] and h(t)^2 + h(2t)^2 = 1 on [1/2, 1].
///
///   h(t) = sin(pi/2 * psi(2t - 1))  on [1/2, 1]
///   h(t) = cos(pi/2 * psi(t - 1))   on [1, 2]
///
/// where psi is the order-kappa smoothstep (degree 2 kappa + 1, first kappa derivatives
/// zero at 0 and 1).  The partition identity then holds by sin^2 + cos^2 = 1.
class NeedletFilter {
 public:
  explicit NeedletFilter(int kappa = 5);

  int kappa() const { return kappa_; }
  double operator()(double t) const;

  /// Order-kappa smoothstep on [0, 1], clamped outside.
  double transition(double x) const;

  ScalarFilter as_scalar() const;
  /// t -> h(t)^2
  ScalarFilter squared() const;

 private:
  int kappa_;
  std::vector<double> binom_;  // C(kappa + n, n), n = 0..kappa
};

/// H(t) = 1 for 0 <= t < 1, h(t)^2 for t >= 1.
class FilterH {
 public:
  explicit FilterH(NeedletFilter base) : base_(std::move(base)) {}

  const NeedletFilter& base() const { return base_; }
  /// Throws DomainError for t < 0.
  double operator()(double t) const;
  ScalarFilter as_scalar() const;

 private:
  NeedletFilter base_;
};

/// Convenience matching the operation name used by callers.
inline NeedletFilter make_needlet_filter(int kappa) { return NeedletFilter(kappa); }
inline double eval_H(const FilterH& filter, double t) { return filter(t); }

}  // namespace sphneedlet
