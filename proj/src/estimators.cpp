#include "sphneedlet/estimators.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "json.hpp"

#include "sphneedlet/errors.hpp"
#include "sphneedlet/parallel.hpp"

namespace sphneedlet {

std::vector<double> hyperinterpolate(std::span<const double> samples, const QuadratureRule& Q, int L,
                                     std::span<const UnitVector> points, AnalysisOptions options,
                                     bool* underresolved) {
  if (L < 0) throw DomainError("hyperinterpolate: negative degree");
  if (samples.size() != Q.size()) throw ValidationError("hyperinterpolate: sample/node count mismatch");
  const bool short_degree = Q.stated_degree() < 2 * L;
  if (short_degree && !options.allow_underresolved)
    throw PreconditionError("hyperinterpolate: quadrature degree " + std::to_string(Q.stated_degree()) +
                            " is below the required " + std::to_string(2 * L));
  if (underresolved) *underresolved = short_degree;
  std::vector<double> u(samples.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = Q.weights()[i] * samples[i];
  const auto fourier = project_weighted(u, L, Q.nodes());
  return evaluate_expansion(fourier, L, points);
}

Approximator needlet_approximator(const NeedletSystem& system, const QuadratureRule& Q) {
  return [&system, &Q](const FieldSample& sample, std::span<const UnitVector> points) {
    const auto values = eval_field(sample, Q.nodes());
    return synthesize(system, analyze(system, values, Q), points);
  };
}

Approximator hyper_approximator(const QuadratureRule& Q, int L) {
  return [&Q, L](const FieldSample& sample, std::span<const UnitVector> points) {
    const auto values = eval_field(sample, Q.nodes());
    return hyperinterpolate(values, Q, L, points);
  };
}

ErrorRow mean_l2_error(const Approximator& approx, const AngularPowerSpectrum& spec, std::size_t n,
                       const QuadratureRule& eval_rule, std::uint64_t seed, double mu0) {
  if (n < 1) throw DomainError("mean_l2_error: need at least one realisation");
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> sq(n, 0.0);
  // Realisations are independent; each writes only its own slot.
  parallel_chunks(n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto sample = sample_field(spec, realisation_seed(seed, i), mu0);
      const auto truth = eval_field(sample, eval_rule.nodes());
      const auto approx_values = approx(sample, eval_rule.nodes());
      double e = 0.0;
      for (std::size_t k = 0; k < truth.size(); ++k) {
        const double d = truth[k] - approx_values[k];
        e += eval_rule.weights()[k] * d * d;
      }
      sq[i] = e;
    }
  });

  ErrorRow row;
  row.n = n;
  row.mse = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(n);
  row.rmse = std::sqrt(row.mse);
  row.l2_errors.resize(n);
  for (std::size_t i = 0; i < n; ++i) row.l2_errors[i] = std::sqrt(sq[i]);
  const double mean = std::accumulate(row.l2_errors.begin(), row.l2_errors.end(), 0.0) / static_cast<double>(n);
  if (n >= 2) {
    double m2 = 0.0, m4 = 0.0;
    for (double e : row.l2_errors) {
      const double d = e - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double nn = static_cast<double>(n);
    row.variance = m2 / (nn - 1.0);
    m2 /= nn;
    m4 /= nn;
    // Large-sample variance of the unbiased sample variance.
    const double var_of_var = (m4 - (nn - 3.0) / (nn - 1.0) * m2 * m2) / nn;
    row.variance_se = std::sqrt(std::max(0.0, var_of_var));
    row.error_se = std::sqrt(row.variance / nn);
    row.variance_defined = true;
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("fit_slope: degenerate abscissae");
  return sxy / sxx;
}

ErrorReport convergence_study(const ConvergenceConfig& config, const QuadratureProvider& quad) {
  if (config.J_min < 0 || config.J_max < config.J_min) throw DomainError("convergence_study: empty J range");
  if (config.samples < 1) throw DomainError("convergence_study: need at least one sample");
  const NeedletFilter filter(config.kappa);
  const int eval_degree = config.eval_degree.value_or(config.spectrum.truncation() + 1);
  const QuadratureRule& eval_rule = quad.rule_for_degree(eval_degree);

  ErrorReport report;
  for (int J = config.J_min; J <= config.J_max; ++J) {
    const auto system = NeedletSystem::from_provider(J, filter, quad, /*verify_rules=*/false);
    const QuadratureRule& Q = quad.rule_for_degree(discretisation_degree(J));
    ErrorRow row = mean_l2_error(needlet_approximator(system, Q), config.spectrum, config.samples, eval_rule,
                                 config.seed, config.mu0);
    row.J = J;
    report.rows.push_back(std::move(row));
  }

  report.fit_from = std::max(config.fit_from, config.J_min);
  report.fit_to = std::min(config.fit_to, config.J_max);
  std::vector<double> xs, ys;
  for (const auto& row : report.rows)
    if (row.J >= report.fit_from && row.J <= report.fit_to && row.rmse > 0.0) {
      xs.push_back(row.J);
      ys.push_back(std::log2(row.rmse));
    }
  if (xs.size() >= 2) report.slope = fit_slope(xs, ys);
  return report;
}

void write_report_csv(const ErrorReport& report, const std::filesystem::path& path, const std::string& echo) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report to " + path.string());
  out << "# " << echo << '\n' << "J,n,mse,rmse,var,seconds\n" << std::setprecision(17);
  for (const auto& r : report.rows)
    out << r.J << ',' << r.n << ',' << r.mse << ',' << r.rmse << ',' << r.variance << ',' << r.seconds << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_report_json(const ErrorReport& report, const std::filesystem::path& path, const std::string& echo) {
  nlohmann::json j;
  j["config"] = echo;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows)
    j["rows"].push_back({{"J", r.J},
                         {"n", r.n},
                         {"mse", r.mse},
                         {"rmse", r.rmse},
                         {"var", r.variance},
                         {"var_defined", r.variance_defined},
                         {"seconds", r.seconds}});
  if (report.slope)
    j["slope"] = *report.slope;
  else
    j["slope"] = nullptr;
  j["fit_range"] = {report.fit_from, report.fit_to};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report to " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace sphneedlet
