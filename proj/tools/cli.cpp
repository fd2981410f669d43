#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "sphneedlet/errors.hpp"
#include "sphneedlet/estimators.hpp"
#include "sphneedlet/filters.hpp"
#include "sphneedlet/needlets.hpp"
#include "sphneedlet/quadrature.hpp"
#include "sphneedlet/random_fields.hpp"

namespace sphneedlet::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const char* method_name(Method m) {
  switch (m) {
    case Method::needlet: return "needlet";
    case Method::hyper: return "hyper";
    case Method::needlet_local: return "needlet-local";
  }
  return "?";
}

bool needs_output(const std::string& command) { return command == "sample" || command == "approx" || command == "converge"; }

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

UnitVector cap_center(const RunConfig& cfg) {
  return UnitVector::from_angles((90.0 - cfg.cap_lat) * kDeg, cfg.cap_lon * kDeg);
}

struct Grid {
  std::vector<double> lat, lon;
  std::vector<UnitVector> points;
};

// Equiangular grid: latitudes 90..-90 inclusive, longitudes 0..360 exclusive.
Grid make_grid(int nlat, int nlon) {
  Grid g;
  for (int i = 0; i < nlat; ++i) {
    const double lat = 90.0 - 180.0 * i / (nlat - 1);
    const double z = i == 0 ? 1.0 : (i == nlat - 1 ? -1.0 : std::sin(lat * kDeg));
    for (int k = 0; k < nlon; ++k) {
      const double lon = 360.0 * k / nlon;
      g.lat.push_back(lat);
      g.lon.push_back(lon);
      g.points.push_back(UnitVector::from_ring(z, lon * kDeg));
    }
  }
  return g;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

QuadratureProvider make_provider(const RunConfig& cfg) { return QuadratureProvider(cfg.quad_dir, !cfg.require_designs); }

}  // namespace

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  require(x != std::string::npos, "--grid must look like 181x360, got '" + text + "'");
  int a = 0, b = 0;
  try {
    std::size_t used = 0;
    a = std::stoi(text.substr(0, x), &used);
    require(used == x, "--grid: bad latitude count");
    const auto rest = text.substr(x + 1);
    b = std::stoi(rest, &used);
    require(used == rest.size(), "--grid: bad longitude count");
  } catch (const std::logic_error&) {
    throw ValidationError("--grid must look like 181x360, got '" + text + "'");
  }
  require(a >= 2 && b >= 1, "--grid needs at least 2 latitudes and 1 longitude");
  return {a, b};
}

void validate(const RunConfig& cfg) {
  require(cfg.command == "sample" || cfg.command == "approx" || cfg.command == "converge" || cfg.command == "verify",
          "unknown command '" + cfg.command + "'");
  require(std::isfinite(cfg.delta) && cfg.delta > 0.0, "--delta must be > 0");
  require(std::isfinite(cfg.s) && cfg.s > 0.0, "--s must be > 0");
  require(cfg.M >= 0 && cfg.M <= 4096, "--M must lie in [0, 4096]");
  require(std::isfinite(cfg.mu0), "--mu0 must be finite");
  require(std::isfinite(cfg.scale) && cfg.scale >= 0.0, "--scale must be >= 0");
  require(cfg.kappa >= 1 && cfg.kappa <= 30, "--kappa must lie in [1, 30]");
  require(cfg.J >= 0 && cfg.J <= 10, "--J must lie in [0, 10]");
  require(cfg.J_min >= 0 && cfg.J_min <= cfg.J, "--J-min must lie in [0, J]");
  require(cfg.j_split >= 0, "--j-split must be >= 0");
  if (cfg.command == "approx" && cfg.method == Method::needlet_local)
    require(cfg.j_split <= cfg.J, "--j-split must lie in [0, J]");
  require(!cfg.L || (*cfg.L >= 0 && *cfg.L <= 2048), "--L must lie in [0, 2048]");
  require(cfg.cap_radius > 0.0 && cfg.cap_radius <= std::numbers::pi, "--cap-radius must lie in (0, pi]");
  require(cfg.cap_lat >= -90.0 && cfg.cap_lat <= 90.0 && std::isfinite(cfg.cap_lon), "--cap-center out of range");
  require(cfg.samples >= 1, "--samples must be >= 1");
  require(cfg.grid_lat >= 2 && cfg.grid_lon >= 1, "--grid needs at least 2 latitudes and 1 longitude");
  if (needs_output(cfg.command)) require(!cfg.out.empty(), cfg.command + " needs --out");

  if (cfg.quad_dir && !fs::is_directory(*cfg.quad_dir))
    throw IoError("--quad-dir " + cfg.quad_dir->string() + " is not a directory");
  if (cfg.field && !fs::is_regular_file(*cfg.field)) throw IoError("--field " + cfg.field->string() + " not found");
  if (!cfg.out.empty()) {
    const auto parent = cfg.out.has_parent_path() ? cfg.out.parent_path() : fs::path(".");
    if (!fs::is_directory(parent)) throw IoError("output directory " + parent.string() + " does not exist");
  }
}

std::string config_echo(const RunConfig& cfg) {
  std::ostringstream s;
  s << std::setprecision(17) << "sphneedlet " << cfg.command << " delta=" << cfg.delta << " s=" << cfg.s
    << " M=" << cfg.M << " mu0=" << cfg.mu0 << " scale=" << cfg.scale << " kappa=" << cfg.kappa << " J=" << cfg.J;
  if (cfg.command == "converge") s << " J_min=" << cfg.J_min << " samples=" << cfg.samples;
  if (cfg.command == "approx") {
    s << " method=" << method_name(cfg.method) << " grid=" << cfg.grid_lat << 'x' << cfg.grid_lon;
    if (cfg.method == Method::hyper) s << " L=" << cfg.L.value_or(approximation_degree(cfg.J));
    if (cfg.method == Method::needlet_local) s << " j_split=" << cfg.j_split;
    if (cfg.method == Method::needlet_local || cfg.with_cap)
      s << " cap_center=" << cfg.cap_lat << ',' << cfg.cap_lon << " cap_radius=" << cfg.cap_radius;
    s << " with_cap=" << (cfg.with_cap ? 1 : 0);
    if (cfg.field) s << " field=" << cfg.field->string();
  }
  s << " seed=" << cfg.seed;
  if (cfg.quad_dir) s << " quad_dir=" << cfg.quad_dir->string();
  return s.str();
}

void cmd_sample(const RunConfig& cfg, std::ostream& log) {
  const AngularPowerSpectrum spec(cfg.delta, cfg.s, cfg.M);
  const auto sample = sample_field(spec, cfg.seed, cfg.mu0, cfg.scale);
  save_field_sample(sample, cfg.out);
  log << "wrote " << sample.coefficients.size() << " coefficients to " << cfg.out.string() << '\n';
}

void cmd_approx(const RunConfig& cfg, std::ostream& log) {
  const auto sample =
      cfg.field ? load_field_sample(*cfg.field)
                : sample_field(AngularPowerSpectrum(cfg.delta, cfg.s, cfg.M), cfg.seed, cfg.mu0, cfg.scale);
  const CosineCap cap(cap_center(cfg), cfg.cap_radius);
  auto truth_at = [&](std::span<const UnitVector> pts) {
    return cfg.with_cap ? composite_field(sample, cap, pts) : eval_field(sample, pts);
  };

  const auto provider = make_provider(cfg);
  const auto grid = make_grid(cfg.grid_lat, cfg.grid_lon);
  std::vector<double> approx;
  if (cfg.method == Method::hyper) {
    const int L = cfg.L.value_or(approximation_degree(cfg.J));
    const auto& Q = provider.rule_for_degree(2 * L);
    log << "hyperinterpolation L=" << L << " with " << provider.describe(2 * L) << " rule (" << Q.size()
        << " nodes)\n";
    approx = hyperinterpolate(truth_at(Q.nodes()), Q, L, grid.points);
  } else {
    // The discretisation rule is the largest requirement short of level J; resolve it first
    // so a missing design is reported by that degree.
    const int disc = discretisation_degree(cfg.J);
    const auto& Q = provider.rule_for_degree(disc);
    const NeedletFilter filter(cfg.kappa);
    const auto system = NeedletSystem::from_provider(cfg.J, filter, provider);
    log << "needlets J=" << cfg.J << " (" << system.needlet_count() << " needlets), discretisation "
        << provider.describe(disc) << " rule (" << Q.size() << " nodes)\n";
    const auto samples = truth_at(Q.nodes());
    if (cfg.method == Method::needlet_local) {
      const auto local = localise(system, cap_center(cfg), cfg.cap_radius, cfg.j_split);
      log << "localised: " << local.retained_count() << " of " << system.needlet_count() << " needlets retained\n";
      approx = local.synthesize(local.analyze(samples, Q), grid.points);
    } else {
      approx = synthesize(system, analyze(system, samples, Q), grid.points);
    }
  }

  const auto truth = truth_at(grid.points);
  auto out = open_output(cfg.out);
  out << "# " << config_echo(cfg) << '\n' << "lat,lon,truth,approx,error\n" << std::setprecision(17);
  double worst = 0.0, worst_in = 0.0, worst_out = 0.0, sq = 0.0;
  const auto c = cap_center(cfg);
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const double e = approx[i] - truth[i];
    out << grid.lat[i] << ',' << grid.lon[i] << ',' << truth[i] << ',' << approx[i] << ',' << e << '\n';
    worst = std::max(worst, std::abs(e));
    sq += e * e;
    if (grid.points[i].distance(c) <= cfg.cap_radius)
      worst_in = std::max(worst_in, std::abs(e));
    else
      worst_out = std::max(worst_out, std::abs(e));
  }
  if (!out) throw IoError("write failed for " + cfg.out.string());
  log << std::setprecision(6) << "max |error| = " << worst
      << ", grid rms error = " << std::sqrt(sq / static_cast<double>(grid.points.size())) << '\n';
  if (cfg.with_cap || cfg.method == Method::needlet_local)
    log << "max |error| inside cap = " << worst_in << ", outside = " << worst_out << '\n';
  log << "wrote " << grid.points.size() << " grid rows to " << cfg.out.string() << '\n';
}

void cmd_converge(const RunConfig& cfg, std::ostream& log) {
  ConvergenceConfig cc;
  cc.spectrum = AngularPowerSpectrum(cfg.delta, cfg.s, cfg.M);
  cc.J_min = cfg.J_min;
  cc.J_max = cfg.J;
  cc.samples = cfg.samples;
  cc.seed = cfg.seed;
  cc.mu0 = cfg.mu0;
  cc.kappa = cfg.kappa;
  const auto provider = make_provider(cfg);
  const auto report = convergence_study(cc, provider);
  log << std::setprecision(6);
  for (const auto& r : report.rows)
    log << "J=" << r.J << " rmse=" << r.rmse << " var=" << r.variance << " (" << r.seconds << " s)\n";
  if (report.slope)
    log << "slope of log2 rmse over J=" << report.fit_from << ".." << report.fit_to << ": " << *report.slope << '\n';
  else
    log << "slope: n/a (fewer than two levels in the fit range)\n";
  if (cfg.out.extension() == ".json")
    write_report_json(report, cfg.out, config_echo(cfg));
  else
    write_report_csv(report, cfg.out, config_echo(cfg));
  log << "wrote " << cfg.out.string() << '\n';
}

bool cmd_verify(const RunConfig& cfg, std::ostream& log) {
  bool all = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    log << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    all = all && ok;
  };
  std::ostringstream d;
  d << std::setprecision(3);

  // Quadrature: every rule the current J would use, plus every shipped design.
  const auto provider = make_provider(cfg);
  std::vector<int> degrees;
  for (int j = 0; j <= cfg.J; ++j) degrees.push_back(needlet_rule_degree(j));
  degrees.push_back(discretisation_degree(cfg.J));
  for (int deg : provider.available_design_degrees()) degrees.push_back(deg);
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
  for (int deg : degrees) {
    const auto& rule = provider.rule_for_degree(deg);
    const auto r = verify_exactness(rule, rule.stated_degree());
    d.str("");
    d << provider.describe(deg) << " rule, stated degree " << rule.stated_degree() << ", max error " << r.max_error;
    report("quadrature exactness L=" + std::to_string(deg), r.pass, d.str());
  }

  const NeedletFilter h(cfg.kappa);
  const FilterH H(h);
  double partition = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = 0.5 + 0.5 * i / 10000.0;
    partition = std::max(partition, std::abs(h(t) * h(t) + h(2 * t) * h(2 * t) - 1.0));
  }
  d.str("");
  d << "max residual " << partition;
  report("filter partition of unity", partition < 1e-12, d.str());

  double telescoping = 0.0;
  for (int J = 0; J <= 8; ++J)
    for (int i = 0; i <= 2000; ++i) {
      const double t = 1.0 + (std::ldexp(1.0, J + 1) - 1.0) * i / 2000.0;
      double sum = 0.0;
      for (int j = 0; j <= J; ++j) sum += std::pow(h(std::ldexp(t, -j)), 2);
      telescoping = std::max(telescoping, std::abs(H(std::ldexp(t, -J)) - sum));
    }
  d.str("");
  d << "max residual " << telescoping;
  report("filter telescoping", telescoping < 1e-12, d.str());

  const int Jk = std::min(cfg.J, 4);
  const auto system = NeedletSystem::with_tensor_rules(Jk, h);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd;
  auto random_point = [&] { return UnitVector::normalized(nd(rng), nd(rng), nd(rng)); };
  double kernel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_point(), y = random_point();
    for (int j = 0; j <= Jk; ++j) {
      double sum = 0.0;
      for (int k = 1; k <= static_cast<int>(system.rule(j).size()); ++k)
        sum += system.needlet(j, k, x) * system.needlet(j, k, y);
      kernel = std::max(kernel, std::abs(sum - filtered_kernel(level_radius(j), h.squared(), x.dot(y))));
    }
  }
  d.str("");
  d << "max residual " << kernel << " (j <= " << Jk << ", 20 pairs)";
  report("needlet kernel sums", kernel < 1e-9, d.str());

  double reproduction = 0.0;
  for (int J = 1; J <= Jk; ++J) {
    const auto sys = NeedletSystem::with_tensor_rules(J, h);
    const auto Q = tensor_rule(discretisation_degree(J));
    const int deg = 1 << (J - 1);
    std::vector<double> c(harmonic_count(deg));
    for (double& v : c) v = nd(rng);
    std::vector<UnitVector> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(random_point());
    const auto v = synthesize(sys, analyze(sys, evaluate_expansion(c, deg, Q.nodes()), Q), pts);
    const auto truth = evaluate_expansion(c, deg, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) reproduction = std::max(reproduction, std::abs(v[i] - truth[i]));
  }
  d.str("");
  d << "max error " << reproduction << " (J <= " << Jk << ")";
  report("polynomial reproduction", reproduction < 1e-8, d.str());
  return all;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fully discrete spherical needlet approximation of Gaussian random fields"};
  app.require_subcommand(1, 1);
  RunConfig cfg;
  std::string grid = "181x360";
  std::string method = "needlet";
  std::string quad_dir, field, out_path, cap_center_text;

  auto* sample = app.add_subcommand("sample", "Draw one field realisation and write its coefficients");
  auto* approx = app.add_subcommand("approx", "Approximate a realisation and export a lat-lon grid");
  auto* converge = app.add_subcommand("converge", "Monte Carlo convergence study over J");
  auto* verify = app.add_subcommand("verify", "Run the invariant suites");

  for (auto* sub : {sample, approx, converge, verify}) {
    sub->add_option("--delta", cfg.delta, "spectrum scale delta")->capture_default_str();
    sub->add_option("--s", cfg.s, "spectrum smoothness s")->capture_default_str();
    sub->add_option("--M", cfg.M, "truncation degree")->capture_default_str();
    sub->add_option("--mu0", cfg.mu0, "field mean")->capture_default_str();
    sub->add_option("--scale", cfg.scale, "multiplier on every coefficient standard deviation")->capture_default_str();
    sub->add_option("--kappa,--filter-kappa", cfg.kappa, "filter smoothness order")->capture_default_str();
    sub->add_option("--J", cfg.J, "highest needlet level")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "master random seed")->capture_default_str();
    sub->add_option("--quad-dir", quad_dir, "directory of design_L<deg>_N<count>.txt files");
    sub->add_flag("--require-designs", cfg.require_designs, "fail instead of falling back to tensor rules");
    sub->add_option("--out", out_path, "output file");
  }
  approx->add_option("--method", method, "needlet | hyper | needlet-local")->capture_default_str();
  approx->add_option("--grid", grid, "lat x lon grid size")->capture_default_str();
  approx->add_option("--j-split", cfg.j_split, "levels above this keep only needlets in the cap")->capture_default_str();
  approx->add_option("--cap-radius", cfg.cap_radius, "cap radius in radians")->capture_default_str();
  approx->add_option("--cap-center", cap_center_text, "cap centre as LAT,LON in degrees (default north pole)");
  approx->add_flag("--with-cap", cfg.with_cap, "add the cosine cap to the field");
  approx->add_option("--field", field, "field-sample CSV to approximate instead of drawing one");
  approx->add_option("--L", cfg.L, "hyperinterpolation degree (default 2^J - 1)");
  converge->add_option("--J-min", cfg.J_min, "lowest level")->capture_default_str();
  converge->add_option("--samples", cfg.samples, "realisations per level")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    if (!quad_dir.empty()) cfg.quad_dir = quad_dir;
    if (!field.empty()) cfg.field = field;
    cfg.out = out_path;
    if (method == "needlet")
      cfg.method = Method::needlet;
    else if (method == "hyper")
      cfg.method = Method::hyper;
    else if (method == "needlet-local")
      cfg.method = Method::needlet_local;
    else
      throw ValidationError("--method must be needlet, hyper or needlet-local");
    std::tie(cfg.grid_lat, cfg.grid_lon) = parse_grid(grid);
    if (!cap_center_text.empty()) {
      const auto comma = cap_center_text.find(',');
      require(comma != std::string::npos, "--cap-center must be LAT,LON");
      try {
        cfg.cap_lat = std::stod(cap_center_text.substr(0, comma));
        cfg.cap_lon = std::stod(cap_center_text.substr(comma + 1));
      } catch (const std::logic_error&) {
        throw ValidationError("--cap-center must be LAT,LON");
      }
    }
    validate(cfg);

    if (cfg.command == "sample") cmd_sample(cfg, out);
    if (cfg.command == "approx") cmd_approx(cfg, out);
    if (cfg.command == "converge") cmd_converge(cfg, out);
    if (cfg.command == "verify") {
      std::ostringstream log;
      const bool ok = cmd_verify(cfg, log);
      out << log.str();
      if (!cfg.out.empty()) {
        auto f = open_output(cfg.out);
        f << "# " << config_echo(cfg) << '\n' << log.str();
      }
      return ok ? kExitOk : kExitValidation;
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace sphneedlet::cli
