#include "sphneedlet/quadrature.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <numeric>
#include <regex>
#include <sstream>

#include "sphneedlet/errors.hpp"

namespace sphneedlet {

QuadratureRule::QuadratureRule(std::vector<UnitVector> nodes, std::vector<double> weights, int stated_degree)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), stated_degree_(stated_degree) {
  if (nodes_.size() != weights_.size()) throw ValidationError("QuadratureRule: node and weight counts differ");
  if (nodes_.empty()) throw ValidationError("QuadratureRule: empty rule");
  if (stated_degree_ < 0) throw ValidationError("QuadratureRule: negative stated degree");
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw ValidationError("QuadratureRule: weight " + std::to_string(i + 1) + " is not positive");
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= total;
}

QuadratureRule QuadratureRule::equal_weight(std::vector<UnitVector> nodes, int stated_degree) {
  std::vector<double> w(nodes.size(), 1.0);
  return {std::move(nodes), std::move(w), stated_degree};
}

double QuadratureRule::integrate(std::span<const double> values) const {
  if (values.size() != nodes_.size()) throw ValidationError("QuadratureRule::integrate: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += weights_[i] * values[i];
  return sum;
}

QuadratureRule load_pointset(const std::filesystem::path& path, int degree) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open point set " + path.string());
  std::vector<UnitVector> nodes;
  std::vector<double> weights;
  std::optional<bool> weighted;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> fields;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(path.string(), lineno, "not a number: '" + tok + "'");
      }
    }
    if (fields.size() != 3 && fields.size() != 4)
      throw ParseError(path.string(), lineno, "expected 3 or 4 columns, found " + std::to_string(fields.size()));
    const bool has_w = fields.size() == 4;
    if (weighted && *weighted != has_w) throw ParseError(path.string(), lineno, "inconsistent column count");
    weighted = has_w;
    try {
      nodes.push_back(UnitVector::checked(fields[0], fields[1], fields[2], 1e-8));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (has_w) {
      if (!(fields[3] > 0.0))
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": nonpositive weight");
      weights.push_back(fields[3]);
    }
  }
  if (nodes.empty()) throw ParseError(path.string(), lineno, "no nodes");
  if (weighted.value_or(false)) return {std::move(nodes), std::move(weights), degree};
  return QuadratureRule::equal_weight(std::move(nodes), degree);
}

void save_pointset(const QuadratureRule& rule, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write point set " + path.string());
  out << "# degree " << rule.stated_degree() << " N " << rule.size() << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto& p = rule.nodes()[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << rule.weights()[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    weights[0] = 2.0;
    return;
  }
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

QuadratureRule tensor_rule(int degree) {
  if (degree < 0) throw DomainError("tensor_rule: negative degree");
  const int nz = (degree + 2) / 2;  // ceil((L+1)/2)
  const int nphi = degree + 1;
  std::vector<double> z, wz;
  gauss_legendre(nz, z, wz);
  std::vector<UnitVector> nodes;
  std::vector<double> weights;
  nodes.reserve(static_cast<std::size_t>(nz) * nphi);
  weights.reserve(nodes.capacity());
  for (int i = 0; i < nz; ++i) {
    for (int k = 0; k < nphi; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / nphi;
      nodes.push_back(UnitVector::from_ring(z[static_cast<std::size_t>(i)], phi));
      weights.push_back(wz[static_cast<std::size_t>(i)] / (2.0 * nphi));
    }
  }
  return {std::move(nodes), std::move(weights), degree};
}

ExactnessReport verify_exactness(const QuadratureRule& rule, int degree) {
  ExactnessReport report;
  if (degree < 0) {
    report.pass = true;
    return report;
  }
  const auto moments = project_weighted(rule.weights(), degree, rule.nodes());
  for (std::size_t i = 0; i < moments.size(); ++i) {
    const double target = i == 0 ? 1.0 : 0.0;
    report.max_error = std::max(report.max_error, std::abs(moments[i] - target));
  }
  report.pass = report.max_error < kExactnessTolerance;
  return report;
}

QuadratureProvider::QuadratureProvider(std::optional<std::filesystem::path> design_dir, bool allow_fallback)
    : allow_fallback_(allow_fallback) {
  if (!design_dir) return;
  if (!std::filesystem::is_directory(*design_dir))
    throw IoError("quadrature directory not found: " + design_dir->string());
  static const std::regex pattern(R"(design_L(\d+)_N(\d+)\.txt)");
  for (const auto& entry : std::filesystem::directory_iterator(*design_dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, m, pattern)) designs_[std::stoi(m[1])] = entry.path();
  }
}

std::vector<int> QuadratureProvider::available_design_degrees() const {
  std::vector<int> out;
  for (const auto& [deg, path] : designs_) out.push_back(deg);
  return out;
}

std::optional<std::filesystem::path> QuadratureProvider::design_file_for(int degree) const {
  const auto it = designs_.lower_bound(degree);
  if (it == designs_.end()) return std::nullopt;
  return it->second;
}

std::string QuadratureProvider::describe(int degree) const {
  if (auto f = design_file_for(degree)) return f->string();
  return allow_fallback_ ? "tensor" : "missing";
}

const QuadratureRule& QuadratureProvider::rule_for_degree(int degree) const {
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(degree); it != cache_.end()) return it->second;
  if (auto file = design_file_for(degree)) {
    const int file_degree = designs_.lower_bound(degree)->first;
    return cache_.emplace(degree, load_pointset(*file, file_degree)).first->second;
  }
  if (!allow_fallback_)
    throw PreconditionError("no quadrature rule of degree >= " + std::to_string(degree) +
                            " available; supply design_L" + std::to_string(degree) +
                            "_N<count>.txt (or larger) in the quadrature directory");
  if (!designs_.empty())
    std::clog << "note: no design of degree >= " << degree << " found; using tensor-product rule\n";
  return cache_.emplace(degree, tensor_rule(degree)).first->second;
}

}  // namespace sphneedlet
