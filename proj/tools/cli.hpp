#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace sphneedlet::cli {

enum class Method { needlet, hyper, needlet_local };

struct RunConfig {
  std::string command;
  double delta = 1.0;
  double s = 1.5;
  int M = 300;
  double mu0 = 0.0;
  double scale = 1.0;
  int kappa = 5;
  int J = 7;
  int J_min = 0;
  int j_split = 4;
  std::optional<int> L;  // hyperinterpolation degree, default 2^J - 1
  double cap_lat = 90.0, cap_lon = 0.0;  // degrees; the north pole
  double cap_radius = std::numbers::pi / 3.0;
  bool with_cap = false;
  std::uint64_t seed = 1;
  std::size_t samples = 20;
  std::optional<std::filesystem::path> quad_dir;
  bool require_designs = false;
  std::optional<std::filesystem::path> field;
  std::filesystem::path out;
  Method method = Method::needlet;
  int grid_lat = 181, grid_lon = 360;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Parses "181x360".  Throws ValidationError.
std::pair<int, int> parse_grid(const std::string& text);

/// Checks every parameter against the library domains and the filesystem
/// (input files exist, output directory exists).  Throws ValidationError or IoError.
void validate(const RunConfig& cfg);

/// One-line `key=value` summary written at the top of every output file.
std::string config_echo(const RunConfig& cfg);

void cmd_sample(const RunConfig& cfg, std::ostream& log);
void cmd_approx(const RunConfig& cfg, std::ostream& log);
void cmd_converge(const RunConfig& cfg, std::ostream& log);
/// Returns false when any invariant suite fails.
bool cmd_verify(const RunConfig& cfg, std::ostream& log);

/// Full entry point: parse, validate, dispatch, and map errors to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sphneedlet::cli
