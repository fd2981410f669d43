#include <cmath>

#include "doctest.h"
#include "sphneedlet/errors.hpp"
#include "sphneedlet/filters.hpp"

using namespace sphneedlet;

TEST_CASE("needlet filter values at the support") {
  const NeedletFilter h(5);
  CHECK(h(0.5) == 0.0);
  CHECK(h(2.0) == 0.0);
  CHECK(h(0.2) == 0.0);
  CHECK(h(3.0) == 0.0);
  CHECK(h(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h(0.75) * h(0.75) + h(1.5) * h(1.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(NeedletFilter(0), DomainError);
}

TEST_CASE("smoothstep transition") {
  for (int kappa : {1, 2, 5, 8}) {
    const NeedletFilter h(kappa);
    CHECK(h.transition(0.0) == 0.0);
    CHECK(h.transition(1.0) == 1.0);
    CHECK(h.transition(0.5) == doctest::Approx(0.5).epsilon(1e-14));
    // Symmetry psi(x) + psi(1-x) = 1.
    for (double x = 0.0; x <= 1.0; x += 0.05) CHECK(h.transition(x) + h.transition(1.0 - x) == doctest::Approx(1.0));
  }
  // Order 1 is the cubic 3x^2 - 2x^3.
  CHECK(NeedletFilter(1).transition(0.3) == doctest::Approx(3 * 0.09 - 2 * 0.027).epsilon(1e-14));
}

TEST_CASE("partition of unity on a dense grid") {
  for (int kappa : {1, 3, 5}) {
    const NeedletFilter h(kappa);
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double t = 0.5 + 0.5 * i / 10000.0;
      worst = std::max(worst, std::abs(h(t) * h(t) + h(2 * t) * h(2 * t) - 1.0));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("range and monotonicity") {
  const NeedletFilter h(5);
  double prev = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double t = 0.5 * i / 1000.0;
    const double v = h(t);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (t > 0.5 && t <= 1.0) CHECK(v >= prev);
    if (t > 1.0 && t <= 2.0) CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("filter H") {
  const FilterH H(NeedletFilter(5));
  CHECK(H(0.5) == 1.0);
  CHECK(H(0.0) == 1.0);
  CHECK(H(2.0) == 0.0);
  CHECK(H(5.0) == 0.0);
  const double h12 = H.base()(1.2);
  CHECK(H(1.2) == doctest::Approx(h12 * h12));
  CHECK_THROWS_AS(H(-0.1), DomainError);
}

TEST_CASE("telescoping identity H(t / 2^J) = sum_j h(t / 2^j)^2") {
  const NeedletFilter h(5);
  const FilterH H(h);
  for (int J = 0; J <= 8; ++J) {
    double worst = 0.0;
    const double top = std::ldexp(1.0, J + 1);
    for (int i = 0; i <= 20000; ++i) {
      const double t = 1.0 + (top - 1.0) * i / 20000.0;
      double sum = 0.0;
      for (int j = 0; j <= J; ++j) {
        const double v = h(std::ldexp(t, -j));
        sum += v * v;
      }
      worst = std::max(worst, std::abs(H(std::ldexp(t, -J)) - sum));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("filter is flat to order kappa at the breakpoints") {
  // C^kappa matching with the constant pieces means |h - limit| = O(eps^(kappa+1)).
  for (int kappa : {2, 5}) {
    const NeedletFilter h(kappa);
    const double order = std::ldexp(1.0, kappa + 1);
    for (double eps : {2e-2, 1e-2}) {
      const double lo = h(0.5 + eps) / h(0.5 + eps / 2);
      const double hi = h(2.0 - eps) / h(2.0 - eps / 2);
      CHECK(lo == doctest::Approx(order).epsilon(0.1));
      CHECK(hi == doctest::Approx(order).epsilon(0.1));
    }
    for (double eps : {1e-2, 1e-3}) {
      CHECK(1.0 - h(1.0 - eps) <= std::pow(eps, kappa + 1));
      CHECK(1.0 - h(1.0 + eps) <= std::pow(eps, kappa + 1));
    }
  }
}
