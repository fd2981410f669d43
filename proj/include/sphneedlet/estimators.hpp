#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sphneedlet/needlets.hpp"
#include "sphneedlet/quadrature.hpp"
#include "sphneedlet/random_fields.hpp"

namespace sphneedlet {

/// Discrete Fourier projection of degree L: sum_{l <= L} sum_m (sum_i w_i T(y_i) Y_lm(y_i)) Y_lm(p).
/// Requires Q exact to degree 2L unless overridden; `underresolved` reports an override.
std::vector<double> hyperinterpolate(std::span<const double> samples, const QuadratureRule& Q, int L,
                                     std::span<const UnitVector> points, AnalysisOptions options = {},
                                     bool* underresolved = nullptr);

/// Approximation of one realisation at the given points.
using Approximator = std::function<std::vector<double>(const FieldSample&, std::span<const UnitVector>)>;

/// Fully discrete needlet approximation V*_J: analysis with Q, synthesis at the points.
Approximator needlet_approximator(const NeedletSystem& system, const QuadratureRule& Q);
/// Degree-L hyperinterpolation with Q.
Approximator hyper_approximator(const QuadratureRule& Q, int L);

struct ErrorRow {
  int J = 0;
  std::size_t n = 0;
  double mse = 0.0;       ///< (1/n) sum_n sum_i w_i (T - V)^2
  double rmse = 0.0;      ///< sqrt(mse)
  double variance = 0.0;  ///< sample variance of the per-realisation L2 errors
  double variance_se = 0.0;
  double error_se = 0.0;  ///< standard error of the mean per-realisation L2 error
  bool variance_defined = false;  ///< false when n == 1
  double seconds = 0.0;
  std::vector<double> l2_errors;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  /// Least-squares slope of log2(rmse) against J over the fit range; empty if fewer than two levels.
  std::optional<double> slope;
  int fit_from = 0, fit_to = 0;
};

/// Draws n realisations (seeds realisation_seed(seed, i)) and estimates the mean squared L2
/// error of `approx` with eval_rule.  Truth and approximation use the same nodes.
ErrorRow mean_l2_error(const Approximator& approx, const AngularPowerSpectrum& spec, std::size_t n,
                       const QuadratureRule& eval_rule, std::uint64_t seed, double mu0 = 0.0);

/// Least-squares slope of y against x.  Throws when fewer than two points.
double fit_slope(std::span<const double> x, std::span<const double> y);

struct ConvergenceConfig {
  AngularPowerSpectrum spectrum{1.0, 1.5, 300};
  int J_min = 0, J_max = 7;
  std::size_t samples = 20;
  std::uint64_t seed = 1;
  double mu0 = 0.0;
  int kappa = 5;
  /// Tail range for the slope fit; clamped to [J_min, J_max].
  int fit_from = 3, fit_to = 7;
  /// Degree of the rule used to measure L2 errors; defaults to M + 1.
  std::optional<int> eval_degree;
};

/// Runs mean_l2_error for every J in range with common random numbers across J,
/// the needlet rules and discretisation rules taken from `quad`.
ErrorReport convergence_study(const ConvergenceConfig& config, const QuadratureProvider& quad);

/// CSV `J,n,mse,rmse,var,seconds` preceded by a `#` config-echo line.
void write_report_csv(const ErrorReport& report, const std::filesystem::path& path, const std::string& echo);
/// Same fields plus slope and the config echo.
void write_report_json(const ErrorReport& report, const std::filesystem::path& path, const std::string& echo);

}  // namespace sphneedlet
