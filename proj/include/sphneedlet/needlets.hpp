#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sphneedlet/filters.hpp"
#include "sphneedlet/harmonics.hpp"
#include "sphneedlet/quadrature.hpp"

namespace sphneedlet {

/// v_{R,f}(t) = 1 for 0 <= R < 1, else sum_l f(l/R) (2l+1) P_l(t) over l <= R * f.support_end.
double filtered_kernel(double R, const ScalarFilter& f, double t);

/// Per-degree weights f(l/R)(2l+1), l = 0..floor(R * support_end); {1} when R < 1.
std::vector<double> kernel_coefficients(double R, const ScalarFilter& f);

/// Kernel radius for level j: 2^(j-1), i.e. 1/2 at j = 0.
inline double level_radius(int j) { return std::ldexp(1.0, j - 1); }

/// Exactness degree a needlet rule at level j must have: 2^(j+1) - 1.
inline int needlet_rule_degree(int j) { return (1 << (j + 1)) - 1; }

/// Degree the discretisation rule must integrate exactly for order J: 3 * 2^(J-1) - 1.
/// At J = 0 the bound is 1/2, so only constants need to be exact.
inline int discretisation_degree(int J) { return J == 0 ? 0 : 3 * (1 << (J - 1)) - 1; }

/// Polynomial degree of an order-J approximation: 2^J - 1.
inline int approximation_degree(int J) { return (1 << J) - 1; }

/// Discrete needlet coefficients <T, psi_jk>_Q, one vector per level.
struct NeedletCoefficients {
  std::vector<std::vector<double>> levels;
  /// Set when the analysis quadrature was below the required degree and the check was overridden.
  bool underresolved_quadrature = false;

  int max_level() const { return static_cast<int>(levels.size()) - 1; }
  std::size_t total() const;
};

struct AnalysisOptions {
  bool allow_underresolved = false;
};

/// Needlet frame up to level J: a filter h plus one quadrature rule per level.
class NeedletSystem {
 public:
  /// Rule j must state degree >= 2^(j+1) - 1; when verify_rules is set each rule
  /// must also pass verify_exactness at that degree.
  NeedletSystem(NeedletFilter filter, std::vector<QuadratureRule> level_rules, bool verify_rules = true);

  /// Levels 0..J drawn from provider.rule_for_degree(2^(j+1) - 1).
  static NeedletSystem from_provider(int J, const NeedletFilter& filter, const QuadratureProvider& provider,
                                     bool verify_rules = true);
  static NeedletSystem with_tensor_rules(int J, const NeedletFilter& filter);

  int max_level() const { return static_cast<int>(rules_.size()) - 1; }
  const NeedletFilter& filter() const { return filter_; }
  const QuadratureRule& rule(int j) const;
  std::size_t needlet_count() const;

  /// psi_jk(p); k is 1-based.
  double needlet(int j, int k, const UnitVector& p) const;

  /// Coefficients h(l / 2^(j-1)) (2l+1) for level j >= 1.
  std::span<const double> level_kernel(int j) const { return kernels_.at(static_cast<std::size_t>(j)); }

  /// Coefficient storage shaped for this system, zero-filled.
  NeedletCoefficients zero_coefficients() const;
  void require_shape(const NeedletCoefficients& c) const;

 private:
  NeedletFilter filter_;
  std::vector<QuadratureRule> rules_;
  std::vector<std::vector<double>> kernels_;
};

/// beta_jk = sum_i w_i T(y_i) psi_jk(y_i).
///
/// Evaluated through the addition theorem: the discrete Fourier coefficients of T
/// under Q up to degree 2^J - 1 are filtered per level and evaluated at the needlet centres.
NeedletCoefficients analyze(const NeedletSystem& system, std::span<const double> samples, const QuadratureRule& Q,
                            AnalysisOptions options = {});

/// Reference route: the defining double sum with explicit needlet evaluation.  O(N_Q * sum N_j * 2^J).
NeedletCoefficients analyze_direct(const NeedletSystem& system, std::span<const double> samples,
                                   const QuadratureRule& Q, AnalysisOptions options = {});

/// V*_J(T; p) = sum_j sum_k beta_jk psi_jk(p).
std::vector<double> synthesize(const NeedletSystem& system, const NeedletCoefficients& coeffs,
                               std::span<const UnitVector> points);

/// Reference route of synthesize with explicit needlet evaluation.
std::vector<double> synthesize_direct(const NeedletSystem& system, const NeedletCoefficients& coeffs,
                                      std::span<const UnitVector> points);

/// U_j(T; p) = sum_k beta_jk psi_jk(p).
std::vector<double> level_contribution(const NeedletSystem& system, const NeedletCoefficients& coeffs, int j,
                                       std::span<const UnitVector> points);

/// Spherical-harmonic coefficients (degree <= 2^J - 1) of the needlet synthesis.
std::vector<double> synthesis_harmonics(const NeedletSystem& system, const NeedletCoefficients& coeffs,
                                        int only_level = -1);

/// sum_i w_i T(y_i) v_{L,H}(y_i . p), evaluated directly from the kernel.
std::vector<double> filtered_hyper(std::span<const double> samples, const QuadratureRule& Q, double L,
                                   const FilterH& filter, std::span<const UnitVector> points,
                                   AnalysisOptions options = {});

/// Needlet subset: every needlet up to j_split, and above it only those centred within
/// `radius` of `center`.
class LocalisedSystem {
 public:
  LocalisedSystem(const NeedletSystem& system, const UnitVector& center, double radius, int j_split);

  const NeedletSystem& system() const { return *system_; }
  bool retained(int j, int k) const;
  std::size_t retained_count() const;
  std::size_t retained_count(int j) const;
  /// Sum of the level-j weights of the retained needlets.
  double retained_weight(int j) const;

  /// Zeroes the coefficients of dropped needlets.
  NeedletCoefficients apply_mask(NeedletCoefficients coeffs) const;

  NeedletCoefficients analyze(std::span<const double> samples, const QuadratureRule& Q,
                              AnalysisOptions options = {}) const;
  std::vector<double> synthesize(const NeedletCoefficients& coeffs, std::span<const UnitVector> points) const;

 private:
  const NeedletSystem* system_;
  std::vector<std::vector<char>> mask_;
};

inline LocalisedSystem localise(const NeedletSystem& system, const UnitVector& center, double radius,
                                int j_split) {
  return LocalisedSystem(system, center, radius, j_split);
}

/// CSV `j,k,beta` with a header; 17 significant digits.
void save_coefficients(const NeedletCoefficients& coeffs, const std::filesystem::path& path,
                       const std::string& comment = {});
NeedletCoefficients load_coefficients(const std::filesystem::path& path);

}  // namespace sphneedlet
