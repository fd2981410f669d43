#include "sphneedlet/needlets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "sphneedlet/errors.hpp"
#include "sphneedlet/parallel.hpp"

namespace sphneedlet {

std::vector<double> kernel_coefficients(double R, const ScalarFilter& f) {
  if (!(R >= 0.0)) throw DomainError("filtered kernel: negative radius");
  if (R < 1.0) return {1.0};
  const int lmax = static_cast<int>(std::floor(R * f.support_end));
  std::vector<double> c(static_cast<std::size_t>(lmax) + 1);
  for (int l = 0; l <= lmax; ++l) c[static_cast<std::size_t>(l)] = f(l / R) * (2.0 * l + 1.0);
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return c;
}

double filtered_kernel(double R, const ScalarFilter& f, double t) {
  if (!(std::abs(t) <= 1.0)) throw DomainError("filtered_kernel: argument outside [-1, 1]");
  return legendre_series(kernel_coefficients(R, f), t);
}

std::size_t NeedletCoefficients::total() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

namespace {

double clamp_dot(const UnitVector& a, const UnitVector& b) { return std::clamp(a.dot(b), -1.0, 1.0); }

void check_degree(const QuadratureRule& Q, int required, const AnalysisOptions& options, bool& flagged,
                  const char* who) {
  if (Q.stated_degree() >= required) return;
  if (!options.allow_underresolved)
    throw PreconditionError(std::string(who) + ": quadrature degree " + std::to_string(Q.stated_degree()) +
                            " is below the required " + std::to_string(required));
  flagged = true;
}

}  // namespace

NeedletSystem::NeedletSystem(NeedletFilter filter, std::vector<QuadratureRule> level_rules, bool verify_rules)
    : filter_(std::move(filter)), rules_(std::move(level_rules)) {
  if (rules_.empty()) throw ValidationError("NeedletSystem: at least one level is required");
  if (rules_.size() > 20) throw DomainError("NeedletSystem: level too large");
  const auto h = filter_.as_scalar();
  for (int j = 0; j <= max_level(); ++j) {
    const auto& rule = rules_[static_cast<std::size_t>(j)];
    const int need = needlet_rule_degree(j);
    if (rule.stated_degree() < need)
      throw PreconditionError("NeedletSystem: level " + std::to_string(j) + " rule states degree " +
                              std::to_string(rule.stated_degree()) + ", needs " + std::to_string(need));
    if (verify_rules) {
      const auto report = verify_exactness(rule, need);
      if (!report.pass)
        throw ValidationError("NeedletSystem: level " + std::to_string(j) + " rule fails exactness at degree " +
                              std::to_string(need) + " (max error " + std::to_string(report.max_error) + ")");
    }
    kernels_.push_back(kernel_coefficients(level_radius(j), h));
  }
}

NeedletSystem NeedletSystem::from_provider(int J, const NeedletFilter& filter, const QuadratureProvider& provider,
                                           bool verify_rules) {
  if (J < 0) throw DomainError("NeedletSystem: negative order");
  std::vector<QuadratureRule> rules;
  for (int j = 0; j <= J; ++j) rules.push_back(provider.rule_for_degree(needlet_rule_degree(j)));
  return {filter, std::move(rules), verify_rules};
}

NeedletSystem NeedletSystem::with_tensor_rules(int J, const NeedletFilter& filter) {
  if (J < 0) throw DomainError("NeedletSystem: negative order");
  std::vector<QuadratureRule> rules;
  for (int j = 0; j <= J; ++j) rules.push_back(tensor_rule(needlet_rule_degree(j)));
  return {filter, std::move(rules), false};
}

const QuadratureRule& NeedletSystem::rule(int j) const {
  if (j < 0 || j > max_level()) throw DomainError("NeedletSystem: level " + std::to_string(j) + " out of range");
  return rules_[static_cast<std::size_t>(j)];
}

std::size_t NeedletSystem::needlet_count() const {
  std::size_t n = 0;
  for (const auto& r : rules_) n += r.size();
  return n;
}

double NeedletSystem::needlet(int j, int k, const UnitVector& p) const {
  const auto& r = rule(j);
  if (k < 1 || static_cast<std::size_t>(k) > r.size())
    throw DomainError("NeedletSystem: needlet index " + std::to_string(k) + " out of range at level " +
                      std::to_string(j));
  const auto idx = static_cast<std::size_t>(k - 1);
  return std::sqrt(r.weights()[idx]) * legendre_series(level_kernel(j), clamp_dot(p, r.nodes()[idx]));
}

NeedletCoefficients NeedletSystem::zero_coefficients() const {
  NeedletCoefficients c;
  for (const auto& r : rules_) c.levels.emplace_back(r.size(), 0.0);
  return c;
}

void NeedletSystem::require_shape(const NeedletCoefficients& c) const {
  if (c.levels.size() != rules_.size())
    throw ValidationError("needlet coefficients have " + std::to_string(c.levels.size()) + " levels, system has " +
                          std::to_string(rules_.size()));
  for (std::size_t j = 0; j < rules_.size(); ++j)
    if (c.levels[j].size() != rules_[j].size())
      throw ValidationError("needlet coefficients at level " + std::to_string(j) + " have " +
                            std::to_string(c.levels[j].size()) + " entries, expected " +
                            std::to_string(rules_[j].size()));
}

namespace {

// (l, m) coefficients scaled by g_l = kernel[l] / (2l+1), truncated to the kernel's degree.
std::vector<double> filter_harmonics(std::span<const double> harmonics, std::span<const double> kernel) {
  const int deg = static_cast<int>(kernel.size()) - 1;
  std::vector<double> out(harmonic_count(deg));
  for (int l = 0; l <= deg; ++l) {
    const double g = kernel[static_cast<std::size_t>(l)] / (2.0 * l + 1.0);
    for (int m = 1; m <= 2 * l + 1; ++m) out[harmonic_index(l, m)] = g * harmonics[harmonic_index(l, m)];
  }
  return out;
}

std::vector<double> weighted_samples(std::span<const double> samples, const QuadratureRule& Q) {
  if (samples.size() != Q.size())
    throw ValidationError("needlet analysis: " + std::to_string(samples.size()) + " samples for " +
                          std::to_string(Q.size()) + " quadrature nodes");
  std::vector<double> u(samples.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = Q.weights()[i] * samples[i];
  return u;
}

}  // namespace

NeedletCoefficients analyze(const NeedletSystem& system, std::span<const double> samples, const QuadratureRule& Q,
                            AnalysisOptions options) {
  NeedletCoefficients out;
  check_degree(Q, discretisation_degree(system.max_level()), options, out.underresolved_quadrature, "analyze");
  const auto u = weighted_samples(samples, Q);
  const auto fourier = project_weighted(u, approximation_degree(system.max_level()), Q.nodes());
  for (int j = 0; j <= system.max_level(); ++j) {
    const auto& rule = system.rule(j);
    const auto kernel = system.level_kernel(j);
    const auto filtered = filter_harmonics(fourier, kernel);
    auto values = evaluate_expansion(filtered, static_cast<int>(kernel.size()) - 1, rule.nodes());
    for (std::size_t k = 0; k < values.size(); ++k) values[k] *= std::sqrt(rule.weights()[k]);
    out.levels.push_back(std::move(values));
  }
  return out;
}

NeedletCoefficients analyze_direct(const NeedletSystem& system, std::span<const double> samples,
                                   const QuadratureRule& Q, AnalysisOptions options) {
  NeedletCoefficients out = system.zero_coefficients();
  check_degree(Q, discretisation_degree(system.max_level()), options, out.underresolved_quadrature,
               "analyze_direct");
  const auto u = weighted_samples(samples, Q);
  for (int j = 0; j <= system.max_level(); ++j) {
    auto& level = out.levels[static_cast<std::size_t>(j)];
    parallel_chunks(level.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
      for (std::size_t k = begin; k < end; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
          sum += u[i] * system.needlet(j, static_cast<int>(k + 1), Q.nodes()[i]);
        level[k] = sum;
      }
    });
  }
  return out;
}

std::vector<double> synthesis_harmonics(const NeedletSystem& system, const NeedletCoefficients& coeffs,
                                        int only_level) {
  system.require_shape(coeffs);
  const int deg = approximation_degree(system.max_level());
  std::vector<double> total(harmonic_count(deg), 0.0);
  for (int j = 0; j <= system.max_level(); ++j) {
    if (only_level >= 0 && j != only_level) continue;
    const auto& rule = system.rule(j);
    const auto& beta = coeffs.levels[static_cast<std::size_t>(j)];
    if (std::all_of(beta.begin(), beta.end(), [](double b) { return b == 0.0; })) continue;
    std::vector<double> u(beta.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = beta[k] * std::sqrt(rule.weights()[k]);
    const auto kernel = system.level_kernel(j);
    const int level_deg = static_cast<int>(kernel.size()) - 1;
    const auto proj = project_weighted(u, level_deg, rule.nodes());
    const auto filtered = filter_harmonics(proj, kernel);
    for (std::size_t i = 0; i < filtered.size(); ++i) total[i] += filtered[i];
  }
  return total;
}

std::vector<double> synthesize(const NeedletSystem& system, const NeedletCoefficients& coeffs,
                               std::span<const UnitVector> points) {
  const auto harmonics = synthesis_harmonics(system, coeffs);
  return evaluate_expansion(harmonics, approximation_degree(system.max_level()), points);
}

std::vector<double> synthesize_direct(const NeedletSystem& system, const NeedletCoefficients& coeffs,
                                      std::span<const UnitVector> points) {
  system.require_shape(coeffs);
  std::vector<double> out(points.size(), 0.0);
  parallel_chunks(points.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t p = begin; p < end; ++p) {
      double sum = 0.0;
      for (int j = 0; j <= system.max_level(); ++j) {
        const auto& beta = coeffs.levels[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < beta.size(); ++k)
          if (beta[k] != 0.0) sum += beta[k] * system.needlet(j, static_cast<int>(k + 1), points[p]);
      }
      out[p] = sum;
    }
  });
  return out;
}

std::vector<double> level_contribution(const NeedletSystem& system, const NeedletCoefficients& coeffs, int j,
                                       std::span<const UnitVector> points) {
  if (j < 0 || j > system.max_level()) throw DomainError("level_contribution: level out of range");
  const auto harmonics = synthesis_harmonics(system, coeffs, j);
  return evaluate_expansion(harmonics, approximation_degree(system.max_level()), points);
}

std::vector<double> filtered_hyper(std::span<const double> samples, const QuadratureRule& Q, double L,
                                   const FilterH& filter, std::span<const UnitVector> points,
                                   AnalysisOptions options) {
  if (!(L >= 0.0)) throw DomainError("filtered_hyper: negative degree parameter");
  bool flagged = false;
  const int required = L < 1.0 ? 0 : static_cast<int>(std::ceil(3.0 * L)) - 1;
  check_degree(Q, required, options, flagged, "filtered_hyper");
  const auto u = weighted_samples(samples, Q);
  const auto kernel = kernel_coefficients(L, filter.as_scalar());
  std::vector<double> out(points.size(), 0.0);
  parallel_chunks(points.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t p = begin; p < end; ++p) {
      double sum = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * legendre_series(kernel, clamp_dot(Q.nodes()[i], points[p]));
      out[p] = sum;
    }
  });
  return out;
}

LocalisedSystem::LocalisedSystem(const NeedletSystem& system, const UnitVector& center, double radius, int j_split)
    : system_(&system) {
  if (!(radius > 0.0 && radius <= std::numbers::pi)) throw DomainError("localise: radius must lie in (0, pi]");
  if (j_split < 0 || j_split > system.max_level()) throw DomainError("localise: split level out of range");
  for (int j = 0; j <= system.max_level(); ++j) {
    const auto& rule = system.rule(j);
    std::vector<char> keep(rule.size(), 1);
    if (j > j_split)
      for (std::size_t k = 0; k < rule.size(); ++k) keep[k] = rule.nodes()[k].distance(center) <= radius;
    mask_.push_back(std::move(keep));
  }
}

bool LocalisedSystem::retained(int j, int k) const {
  system_->rule(j);
  const auto& m = mask_[static_cast<std::size_t>(j)];
  if (k < 1 || static_cast<std::size_t>(k) > m.size()) throw DomainError("localise: needlet index out of range");
  return m[static_cast<std::size_t>(k - 1)] != 0;
}

std::size_t LocalisedSystem::retained_count(int j) const {
  system_->rule(j);
  const auto& m = mask_[static_cast<std::size_t>(j)];
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), char{1}));
}

std::size_t LocalisedSystem::retained_count() const {
  std::size_t n = 0;
  for (int j = 0; j <= system_->max_level(); ++j) n += retained_count(j);
  return n;
}

double LocalisedSystem::retained_weight(int j) const {
  const auto& rule = system_->rule(j);
  const auto& m = mask_[static_cast<std::size_t>(j)];
  double w = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m[k]) w += rule.weights()[k];
  return w;
}

NeedletCoefficients LocalisedSystem::apply_mask(NeedletCoefficients coeffs) const {
  system_->require_shape(coeffs);
  for (std::size_t j = 0; j < mask_.size(); ++j)
    for (std::size_t k = 0; k < mask_[j].size(); ++k)
      if (!mask_[j][k]) coeffs.levels[j][k] = 0.0;
  return coeffs;
}

NeedletCoefficients LocalisedSystem::analyze(std::span<const double> samples, const QuadratureRule& Q,
                                             AnalysisOptions options) const {
  return apply_mask(sphneedlet::analyze(*system_, samples, Q, options));
}

std::vector<double> LocalisedSystem::synthesize(const NeedletCoefficients& coeffs,
                                                std::span<const UnitVector> points) const {
  return sphneedlet::synthesize(*system_, apply_mask(coeffs), points);
}

void save_coefficients(const NeedletCoefficients& coeffs, const std::filesystem::path& path,
                       const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write coefficients to " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  if (coeffs.underresolved_quadrature) out << "# underresolved_quadrature=1\n";
  out << "j,k,beta\n" << std::setprecision(17);
  for (std::size_t j = 0; j < coeffs.levels.size(); ++j)
    for (std::size_t k = 0; k < coeffs.levels[j].size(); ++k)
      out << j << ',' << k + 1 << ',' << coeffs.levels[j][k] << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

NeedletCoefficients load_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coefficients " + path.string());
  NeedletCoefficients c;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("underresolved_quadrature=1") != std::string::npos) c.underresolved_quadrature = true;
      continue;
    }
    if (!header) {
      if (line != "j,k,beta") throw ParseError(path.string(), lineno, "expected header 'j,k,beta'");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string sj, sk, sb;
    if (!std::getline(ls, sj, ',') || !std::getline(ls, sk, ',') || !std::getline(ls, sb))
      throw ParseError(path.string(), lineno, "expected three fields");
    long j = 0, k = 0;
    double beta = 0.0;
    try {
      j = std::stol(sj);
      k = std::stol(sk);
      beta = std::stod(sb);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "malformed number");
    }
    if (j < 0 || k < 1) throw ParseError(path.string(), lineno, "index out of range");
    if (static_cast<std::size_t>(j) >= c.levels.size()) c.levels.resize(static_cast<std::size_t>(j) + 1);
    auto& level = c.levels[static_cast<std::size_t>(j)];
    if (static_cast<std::size_t>(k) != level.size() + 1)
      throw ParseError(path.string(), lineno, "needlet indices must be consecutive within a level");
    level.push_back(beta);
  }
  if (!header) throw ParseError(path.string(), lineno, "missing header");
  return c;
}

}  // namespace sphneedlet
