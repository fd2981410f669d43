#include "sphneedlet/random_fields.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>

#include "sphneedlet/errors.hpp"

namespace sphneedlet {

AngularPowerSpectrum::AngularPowerSpectrum(double delta, double s, int truncation)
    : delta_(delta), s_(s), M_(truncation) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("AngularPowerSpectrum: delta must be > 0");
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("AngularPowerSpectrum: s must be > 0");
  if (truncation < 0) throw DomainError("AngularPowerSpectrum: truncation must be >= 0");
}

double AngularPowerSpectrum::operator()(int l) const {
  if (l < 0 || l > M_)
    throw DomainError("AngularPowerSpectrum: degree " + std::to_string(l) + " outside [0, " + std::to_string(M_) +
                      "]");
  return std::pow(1.0 + delta_ * l, -(2.0 * s_ + 2.0));
}

double AngularPowerSpectrum::variance() const {
  double v = 0.0;
  for (int l = 0; l <= M_; ++l) v += (2.0 * l + 1.0) * (*this)(l);
  return v;
}

double AngularPowerSpectrum::expected_sobolev_norm_sq(double sobolev_s) const {
  double v = 0.0;
  for (int l = 0; l <= M_; ++l) v += std::pow(1.0 + eigenvalue(2, l), sobolev_s) * (2.0 * l + 1.0) * (*this)(l);
  return v;
}

FieldSample FieldSample::zeros(int truncation) {
  if (truncation < 0) throw DomainError("FieldSample: negative truncation");
  FieldSample f;
  f.truncation = truncation;
  f.coefficients.assign(harmonic_count(truncation), 0.0);
  return f;
}

FieldSample sample_field(const AngularPowerSpectrum& spec, std::uint64_t seed, double mu0, double scale) {
  if (!std::isfinite(scale) || scale < 0.0) throw DomainError("sample_field: scale must be finite and >= 0");
  FieldSample f = FieldSample::zeros(spec.truncation());
  f.mu0 = mu0;
  f.delta = spec.delta();
  f.s = spec.smoothness();
  f.seed = seed;
  f.scale = scale;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l <= spec.truncation(); ++l) {
    const double sd = scale * std::sqrt(spec(l));
    for (int m = 1; m <= 2 * l + 1; ++m) f.at(l, m) = sd * normal(rng);
  }
  f.at(0, 1) += mu0;
  return f;
}

std::uint64_t realisation_seed(std::uint64_t master, std::uint64_t n) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<double> eval_field(const FieldSample& sample, std::span<const UnitVector> points) {
  if (sample.coefficients.size() != harmonic_count(sample.truncation))
    throw ValidationError("eval_field: coefficient count does not match truncation");
  return evaluate_expansion(sample.coefficients, sample.truncation, points);
}

double covariance_value(const AngularPowerSpectrum& spec, double t) {
  if (!(std::abs(t) <= 1.0)) throw DomainError("covariance_value: argument outside [-1, 1]");
  std::vector<double> c(static_cast<std::size_t>(spec.truncation()) + 1);
  for (int l = 0; l <= spec.truncation(); ++l) c[static_cast<std::size_t>(l)] = spec(l) * (2.0 * l + 1.0);
  return legendre_series(c, t);
}

double sobolev_norm_sq(const FieldSample& sample, double s) {
  if (!(s >= 0.0)) throw DomainError("sobolev_norm_sq: s must be >= 0");
  double sum = 0.0;
  for (int l = 0; l <= sample.truncation; ++l) {
    const double b = std::pow(1.0 + eigenvalue(2, l), s);
    double level = 0.0;
    for (int m = 1; m <= 2 * l + 1; ++m) level += sample.at(l, m) * sample.at(l, m);
    sum += b * level;
  }
  return sum;
}

CosineCap::CosineCap(const UnitVector& c, double r) : center(c), radius(r) {
  if (!(r > 0.0 && r <= std::numbers::pi)) throw DomainError("CosineCap: radius must lie in (0, pi]");
}

double CosineCap::operator()(const UnitVector& p) const {
  const double dist = p.distance(center);
  if (dist > radius) return 0.0;
  return std::cos(std::numbers::pi / 2.0 * dist / radius);
}

std::vector<double> composite_field(const FieldSample& sample, const CosineCap& cap,
                                    std::span<const UnitVector> points) {
  auto values = eval_field(sample, points);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += cap(points[i]);
  return values;
}

void save_field_sample(const FieldSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write field sample to " + path.string());
  out << std::setprecision(17);
  out << "mu0,delta,s,M,seed\n"
      << sample.mu0 << ',' << sample.delta << ',' << sample.s << ',' << sample.truncation << ',' << sample.seed
      << '\n';
  if (sample.scale != 1.0) out << "# scale=" << sample.scale << '\n';
  out << "l,m,a\n";
  for (int l = 0; l <= sample.truncation; ++l)
    for (int m = 1; m <= 2 * l + 1; ++m) out << l << ',' << m << ',' << sample.at(l, m) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ls(line);
  std::string f;
  while (std::getline(ls, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

FieldSample load_field_sample(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field sample " + path.string());
  const std::string where = path.string();
  std::string line;
  std::size_t lineno = 0;
  std::string scale_line;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') {
        if (line.rfind("# scale=", 0) == 0) scale_line = line.substr(8);
        continue;
      }
      return true;
    }
    return false;
  };
  if (!next() || line != "mu0,delta,s,M,seed") throw ParseError(where, lineno, "expected header 'mu0,delta,s,M,seed'");
  if (!next()) throw ParseError(where, lineno, "missing metadata row");
  FieldSample f;
  try {
    const auto meta = split_csv(line);
    if (meta.size() != 5) throw std::invalid_argument("fields");
    f.mu0 = std::stod(meta[0]);
    f.delta = std::stod(meta[1]);
    f.s = std::stod(meta[2]);
    f.truncation = std::stoi(meta[3]);
    f.seed = std::stoull(meta[4]);
  } catch (const std::exception&) {
    throw ParseError(where, lineno, "malformed metadata row");
  }
  if (f.truncation < 0) throw ParseError(where, lineno, "negative truncation");
  if (!next() || line != "l,m,a") throw ParseError(where, lineno, "expected header 'l,m,a'");
  if (!scale_line.empty()) {
    try {
      f.scale = std::stod(scale_line);
    } catch (const std::exception&) {
      throw ParseError(where, lineno, "malformed scale comment");
    }
  }
  f.coefficients.assign(harmonic_count(f.truncation), 0.0);
  std::vector<char> seen(f.coefficients.size(), 0);
  while (next()) {
    const auto row = split_csv(line);
    int l = 0, m = 0;
    double a = 0.0;
    try {
      if (row.size() != 3) throw std::invalid_argument("fields");
      l = std::stoi(row[0]);
      m = std::stoi(row[1]);
      a = std::stod(row[2]);
    } catch (const std::exception&) {
      throw ParseError(where, lineno, "malformed coefficient row");
    }
    if (l < 0 || l > f.truncation || m < 1 || m > 2 * l + 1)
      throw ParseError(where, lineno, "coefficient index out of range");
    const auto idx = harmonic_index(l, m);
    if (seen[idx]) throw ParseError(where, lineno, "duplicate coefficient");
    seen[idx] = 1;
    f.coefficients[idx] = a;
  }
  for (char s : seen)
    if (!s) throw ParseError(where, lineno, "missing coefficients");
  return f;
}

}  // namespace sphneedlet
