#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sphneedlet/harmonics.hpp"

namespace sphneedlet {

/// Positive-weight rule on S^2 for the normalized measure: weights are > 0 and sum to 1.
class QuadratureRule {
 public:
  /// Validates positivity and count; normalizes the weights to sum 1.
  QuadratureRule(std::vector<UnitVector> nodes, std::vector<double> weights, int stated_degree);

  /// Equal weights 1/N.
  static QuadratureRule equal_weight(std::vector<UnitVector> nodes, int stated_degree);

  std::span<const UnitVector> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }
  int stated_degree() const { return stated_degree_; }

  /// sum_i w_i f(x_i)
  double integrate(std::span<const double> values) const;

 private:
  std::vector<UnitVector> nodes_;
  std::vector<double> weights_;
  int stated_degree_;
};

/// Reads whitespace-separated `x y z` or `x y z w` lines; `#` lines and blank lines are skipped.
/// Files without a weight column become equal-weight spherical designs.
QuadratureRule load_pointset(const std::filesystem::path& path, int degree);

/// Writes `x y z w` lines at 17 significant digits.
void save_pointset(const QuadratureRule& rule, const std::filesystem::path& path);

/// Gauss-Legendre nodes in z = cos(theta) (ceil((L+1)/2) of them) crossed with L+1
/// equispaced longitudes.  Exact for spherical polynomials of degree <= L.
QuadratureRule tensor_rule(int degree);

/// Gauss-Legendre nodes and weights on [-1, 1], ascending; weights sum to 2.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct ExactnessReport {
  double max_error = 0.0;
  bool pass = false;
};

/// Checks sum_i w_i Y_{l,m}(x_i) = delta_{l0} for all l <= degree; passes below 1e-9.
ExactnessReport verify_exactness(const QuadratureRule& rule, int degree);

inline constexpr double kExactnessTolerance = 1e-9;

/// Resolves rules by degree: an exact-degree design file from the directory, else the
/// smallest larger design, else the tensor rule (unless fallback is disabled).
/// Design files are named design_L<degree>_N<count>.txt.
class QuadratureProvider {
 public:
  QuadratureProvider() = default;
  explicit QuadratureProvider(std::optional<std::filesystem::path> design_dir, bool allow_fallback = true);

  /// Thread-safe; rules are cached by requested degree.
  const QuadratureRule& rule_for_degree(int degree) const;

  /// Degrees of the design files found, ascending.
  std::vector<int> available_design_degrees() const;

  /// Where the rule for `degree` comes from: a file path or "tensor".
  std::string describe(int degree) const;

 private:
  std::optional<std::filesystem::path> design_file_for(int degree) const;

  std::map<int, std::filesystem::path> designs_;
  bool allow_fallback_ = true;
  mutable std::mutex mutex_;
  mutable std::map<int, QuadratureRule> cache_;
};

}  // namespace sphneedlet
