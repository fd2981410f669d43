#include "sphneedlet/filters.hpp"

#include <cmath>
#include <numbers>

#include "sphneedlet/errors.hpp"

namespace sphneedlet {

NeedletFilter::NeedletFilter(int kappa) : kappa_(kappa) {
  if (kappa < 1) throw DomainError("NeedletFilter: smoothness order must be >= 1");
  binom_.resize(static_cast<std::size_t>(kappa) + 1);
  double c = 1.0;
  for (int n = 0; n <= kappa; ++n) {
    binom_[static_cast<std::size_t>(n)] = c;
    c = c * (kappa + n + 1) / (n + 1);
  }
}

double NeedletFilter::transition(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // psi(x) = x^(k+1) sum_{n=0}^{k} C(k+n, n) (1-x)^n
  double sum = 0.0, pw = 1.0;
  for (int n = 0; n <= kappa_; ++n) {
    sum += binom_[static_cast<std::size_t>(n)] * pw;
    pw *= 1.0 - x;
  }
  return std::pow(x, kappa_ + 1) * sum;
}

double NeedletFilter::operator()(double t) const {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (t <= 0.5 || t >= 2.0) return 0.0;
  if (t <= 1.0) return std::sin(half_pi * transition(2.0 * t - 1.0));
  return std::cos(half_pi * transition(t - 1.0));
}

ScalarFilter NeedletFilter::as_scalar() const {
  return {[f = *this](double t) { return f(t); }, 2.0};
}

ScalarFilter NeedletFilter::squared() const {
  return {[f = *this](double t) {
            const double v = f(t);
            return v * v;
          },
          2.0};
}

double FilterH::operator()(double t) const {
  if (t < 0.0) throw DomainError("FilterH: negative argument");
  if (t < 1.0) return 1.0;
  const double v = base_(t);
  return v * v;
}

ScalarFilter FilterH::as_scalar() const {
  return {[f = *this](double t) { return f(t); }, 2.0};
}

}  // namespace sphneedlet
