// heterodyn: configuration-driven runner for every library module.
//
//   heterodyn <subcommand> --config PATH [--seed U64] [--out DIR] [--threads N] [--plot-data]
//
// Exit 0 on success, 1 for invalid configuration or input (one machine-readable
// "error: code=... message=..." line on stderr), 2 when a statistical or
// modelling assumption fails at run time.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "heterodyn/config_io.hpp"
#include "heterodyn/error.hpp"
#include "heterodyn/evt.hpp"
#include "heterodyn/filter.hpp"
#include "heterodyn/gev.hpp"
#include "heterodyn/parallel.hpp"
#include "heterodyn/report.hpp"
#include "heterodyn/simulate.hpp"
#include "heterodyn/stats.hpp"
#include "heterodyn/transfer.hpp"
#include "heterodyn/version.hpp"

namespace fs = std::filesystem;
using namespace heterodyn;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::size_t threads = 0;  // 0: HETERODYN_THREADS, else 1
  bool plot_data = false;
};

// Loaded configuration plus the provenance every output file carries.
struct Context {
  ModelConfig config;
  std::uint64_t hash;
  SeededStream stream;
  fs::path out;
  bool plot;
};

class OutputError : public Error {
 public:
  explicit OutputError(const std::string& what) : Error("invalid-output", what) {}
};

std::string quote(const std::string& s) {
  std::string r;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') r += '\\';
    r += ch;
  }
  return r;
}

void fail_line(const std::string& code, const std::string& message) {
  std::cerr << "error: code=" << code << " message=\"" << quote(message) << "\"\n";
}

// Errors the user fixes by changing the config or the flags.
bool is_input_error(const Error& e) {
  return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e) ||
         dynamic_cast<const DomainError*>(&e) || dynamic_cast<const GridMismatch*>(&e) ||
         dynamic_cast<const OutputError*>(&e);
}

Context make_context(const Common& c) {
  if (c.config_path.empty()) throw InputError("--config is required");
  if (!fs::is_regular_file(c.config_path)) throw InputError("config file not found: " + c.config_path);
  ModelSpec spec = load_model_spec(c.config_path);
  const std::uint64_t hash = config_hash(spec);
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec || !fs::is_directory(c.out_dir)) throw OutputError("cannot create output directory " + c.out_dir);
  if (c.threads > 0) set_thread_count(c.threads);
  return {ModelConfig(spec), hash, {c.seed, 0}, fs::path(c.out_dir), c.plot_data};
}

// Whole file is built in memory and written once, so a failed run leaves no
// half-written artifact behind.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  body(os);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError("cannot write " + path.string());
  f << os.str();
  if (!f) throw OutputError("write failed: " + path.string());
  std::cout << "wrote " << path.string() << '\n';
}

// Two-column "x y" data for plotting, headed like every other artifact.
void write_plot(const Context& ctx, const std::string& name, const std::string& xlabel,
                const std::string& ylabel, const std::vector<double>& x, const std::vector<double>& y) {
  if (!ctx.plot) return;
  write_file(ctx.out / name, [&](std::ostream& os) {
    write_header(os, ctx.hash, ctx.stream);
    os << "# " << xlabel << ' ' << ylabel << '\n';
    // Points at infinity (e.g. the Hilbert distance of priors with different
    // supports) cannot be drawn and are left out.
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::isfinite(x[i]) && std::isfinite(y[i])) os << format_number(x[i]) << ' ' << format_number(y[i]) << '\n';
  });
}

std::vector<double> iota(std::size_t n, double start = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i);
  return v;
}

void require_positive(std::size_t v, const char* name) {
  if (v < 1) throw InputError(std::string(name) + " must be ≥ 1");
}

// ---------------------------------------------------------------------------

int run_validate(const Context& ctx) {
  const ValidationReport r = validate_config(ctx.config);
  write_file(ctx.out / "validation.csv",
             [&](std::ostream& os) { write_validation_csv(os, r, ctx.hash, ctx.stream); });
  for (const auto& c : r.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  if (!r.valid()) {
    std::string failed;
    for (const auto& c : r.checks)
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    throw ConfigError("validation failed: " + failed);
  }
  return 0;
}

struct SimulateArgs {
  std::size_t n = 10000;
  std::optional<double> x0;
  std::size_t burn_in = 1000;
};

int run_simulate(const Context& ctx, const SimulateArgs& a) {
  require_positive(a.n, "n");
  SimulateOptions opt;
  opt.burn_in = a.burn_in;
  const Start start = a.x0 ? Start::at(*a.x0) : Start::stationary();
  const Trajectory tr = simulate(ctx.config, a.n, start, ctx.stream, opt);
  write_file(ctx.out / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); });
  const std::vector<double> t = iota(tr.size());
  write_plot(ctx, "trajectory_x.dat", "t", "x", t, tr.x);
  write_plot(ctx, "trajectory_z.dat", "t", "z", t, tr.z);
  if (tr.size() > 1) {
    const std::vector<double> prev(tr.x.begin(), tr.x.end() - 1), next(tr.x.begin() + 1, tr.x.end());
    write_plot(ctx, "return_map.dat", "x_t", "x_t+1", prev, next);
  }
  return 0;
}

struct StationaryArgs {
  std::size_t cells = 1024;
  std::size_t lags = 50;
  bool ulam = false;
};

int run_stationary(const Context& ctx, const StationaryArgs& a) {
  const KernelMatrix L = build_ulam(ctx.config, a.cells);
  const SpectralReport r = stationary_density(L);
  const Grid& g = L.grid();
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < g.n; ++i) x[i] = g.center(i);
  const std::vector<double> corr = correlation(x, x, L, r.leading_density, a.lags);
  write_file(ctx.out / "density.csv",
             [&](std::ostream& os) { write_density_csv(os, r.leading_density, ctx.hash, ctx.stream); });
  write_file(ctx.out / "spectral.csv",
             [&](std::ostream& os) { write_spectral_csv(os, r, corr, ctx.hash, ctx.stream); });
  if (a.ulam) {
    // Binary, so no text header; provenance lives alongside in spectral.csv.
    write_file(ctx.out / "kernel.ulam", [&](std::ostream& os) { write_ulam(os, L); });
    write_file(ctx.out / "density.ulam", [&](std::ostream& os) { write_ulam(os, r.leading_density); });
  }
  std::vector<double> dens(g.n);
  for (std::size_t i = 0; i < g.n; ++i) dens[i] = r.leading_density.weight(i);
  write_plot(ctx, "density.dat", "x", "density", x, dens);
  std::vector<double> abs_corr(corr.size());
  for (std::size_t t = 0; t < corr.size(); ++t) abs_corr[t] = std::abs(corr[t]);
  write_plot(ctx, "correlation.dat", "t", "abs_C", iota(corr.size()), abs_corr);
  std::cout << "second eigenvalue modulus " << format_number(r.second_modulus) << '\n';
  return 0;
}

struct FilterArgs {
  std::size_t cells = 2048;
  std::size_t n = 500;
  std::size_t stride = 16;
};

int run_filter(const Context& ctx, const FilterArgs& a) {
  require_positive(a.n, "n");
  require_positive(a.stride, "stride");
  const KernelMatrix L = build_ulam(ctx.config, a.cells);
  const GridDensity mu = stationary_density(L).leading_density;
  const AssumptionReport ar = best_assumption_point(ctx.config, mu, a.stride);
  const StabilityReport r =
      stability_experiment(ctx.config, L, GridDensity::uniform(L.grid()), mu, a.n, ctx.stream, ar);
  write_file(ctx.out / "stability.csv",
             [&](std::ostream& os) { write_stability_csv(os, r, ctx.hash, ctx.stream); });
  std::vector<double> step, tv, theta;
  for (const auto& s : r.steps) {
    step.push_back(static_cast<double>(s.step));
    tv.push_back(s.tv);
    theta.push_back(s.theta0);
  }
  write_plot(ctx, "tv.dat", "step", "tv", step, tv);
  write_plot(ctx, "theta0.dat", "step", "theta0", step, theta);
  std::cout << "main assumption " << (ar.passed() ? "holds" : "fails") << " at z0 = " << format_number(ar.z0)
            << ", c = " << format_number(ar.certificate.c) << '\n';
  return 0;
}

struct StatsArgs {
  std::size_t cells = 1024;
  std::size_t n = 10000;
  std::size_t replicas = 1000;
  std::size_t lags = 100;
  std::vector<std::size_t> conc_n = {1000, 10000};
  std::size_t conc_replicas = 100;
};

int run_stats(const Context& ctx, const StatsArgs& a) {
  require_positive(a.n, "n");
  require_positive(a.replicas, "replicas");
  const StatsContext sc = make_stats_context(ctx.config, a.cells);
  const Observable u{"x", [](double x) { return x; }};
  const CltReport clt = clt_check(ctx.config, sc, u, a.n, a.replicas, ctx.stream, a.lags);
  // Deviation levels in units of the CLT scale sqrt(sigma^2 / n).
  const double scale = std::sqrt(clt.sigma2_series / static_cast<double>(a.n));
  std::vector<double> eps;
  for (int k = 1; k <= 8; ++k) eps.push_back(0.5 * k * scale);
  const LdReport ld = ld_from_sums(clt.sums, a.n, eps, clt.sigma2_series);
  const ConcentrationReport conc = concentration_check(ctx.config, sc, a.conc_n, a.conc_replicas, ctx.stream.substream(1));
  write_file(ctx.out / "clt.csv", [&](std::ostream& os) { write_clt_csv(os, clt, ctx.hash, ctx.stream); });
  write_file(ctx.out / "ld.csv", [&](std::ostream& os) { write_ld_csv(os, ld, ctx.hash, ctx.stream); });
  write_file(ctx.out / "concentration.csv",
             [&](std::ostream& os) { write_concentration_csv(os, conc, ctx.hash, ctx.stream); });
  std::vector<double> le, lr, cn, cm;
  for (const auto& p : ld.points) {
    le.push_back(p.eps);
    lr.push_back(p.rate);
  }
  for (const auto& row : conc.rows) {
    cn.push_back(std::log(static_cast<double>(row.n)));
    cm.push_back(std::log(row.mean));
  }
  write_plot(ctx, "ld_rate.dat", "eps", "rate", le, lr);
  write_plot(ctx, "concentration.dat", "log_n", "log_mean_kappa", cn, cm);
  std::cout << "KS p = " << format_number(clt.ks.p_value) << ", sigma^2 batch " << format_number(clt.sigma2_batch)
            << ", series " << format_number(clt.sigma2_series) << '\n';
  return 0;
}

struct EvtArgs {
  std::size_t cells = 1024;
  std::size_t t = 1000;
  std::size_t replicas = 2000;
  std::vector<double> taus = {0.5, 1.0, 2.0};
  std::optional<double> center;
  std::size_t blocks = 500;
};

void write_gev_csv(std::ostream& os, const ModulationReport& r, std::size_t t, const Context& ctx) {
  const GevFit& f = r.rows[0].fit;
  write_header(os, ctx.hash, ctx.stream);
  os << "# center=" << format_number(r.center) << '\n';
  os << "# blocks=" << r.rows[0].m << '\n';
  os << "# block_length=" << t << '\n';
  os << "parameter,estimate,ci_lo,ci_hi\n";
  const char* names[3] = {"xi", "kappa", "sigma"};
  const double est[3] = {f.xi, f.kappa, f.sigma};
  for (int k = 0; k < 3; ++k)
    os << names[k] << ',' << format_number(est[k]) << ',' << format_number(f.ci_95[k].lo) << ','
       << format_number(f.ci_95[k].hi) << '\n';
}

int run_evt(const Context& ctx, const EvtArgs& a) {
  require_positive(a.t, "t");
  require_positive(a.replicas, "replicas");
  const StatsContext sc = make_stats_context(ctx.config, a.cells);
  EvtOptions opt;
  opt.center = a.center;
  const GumbelReport gum = gumbel_check(ctx.config, sc, a.taus, a.t, a.replicas, ctx.stream, opt);
  const PoissonReport poi = visit_count_check(ctx.config, sc, 1.0, a.t, a.replicas, ctx.stream.substream(1), opt);
  ReppSpec spec{{{0.0, 1.0}, {1.0, 2.0}}, 1.0, 0};
  const std::vector<std::vector<double>> ys = {{std::log(2.0), 0.0}, {0.0, std::log(2.0)},
                                               {std::log(2.0), std::log(2.0)}};
  const ReppReport rep = repp_laplace_check(ctx.config, sc, spec, ys, a.t, a.replicas, ctx.stream.substream(2), opt);
  const std::vector<std::size_t> ms = {a.blocks};
  const ModulationReport mod = modulation_detect(ctx.config, sc, a.t, ms, ctx.stream.substream(3), a.center);
  write_file(ctx.out / "gumbel.csv", [&](std::ostream& os) { write_gumbel_csv(os, gum, ctx.hash, ctx.stream); });
  write_file(ctx.out / "poisson.csv", [&](std::ostream& os) { write_poisson_csv(os, poi, ctx.hash, ctx.stream); });
  write_file(ctx.out / "repp.csv", [&](std::ostream& os) { write_repp_csv(os, rep, ctx.hash, ctx.stream); });
  write_file(ctx.out / "gev.csv", [&](std::ostream& os) { write_gev_csv(os, mod, a.t, ctx); });
  std::vector<double> tau, w, e;
  for (const auto& row : gum.rows) {
    tau.push_back(row.tau);
    w.push_back(row.W_hat);
    e.push_back(row.e_minus_tau);
  }
  write_plot(ctx, "gumbel_empirical.dat", "tau", "W_hat", tau, w);
  write_plot(ctx, "gumbel_limit.dat", "tau", "exp_minus_tau", tau, e);
  std::vector<double> k, obs;
  for (std::size_t i = 0; i < poi.histogram.size(); ++i) {
    k.push_back(static_cast<double>(i));
    obs.push_back(static_cast<double>(poi.histogram[i]) / static_cast<double>(poi.replicas));
  }
  write_plot(ctx, "poisson.dat", "k", "frequency", k, obs);
  std::cout << "gumbel centre " << format_number(gum.center) << ", poisson p = " << format_number(poi.p_value)
            << ", GEV xi = " << format_number(mod.rows[0].fit.xi) << '\n';
  return 0;
}

struct DetectArgs {
  std::size_t cells = 1024;
  std::size_t t = 1000;
  std::vector<std::size_t> m = {100, 300, 1000};
  std::optional<double> center;
};

int run_detect(const Context& ctx, const DetectArgs& a) {
  require_positive(a.t, "t");
  for (std::size_t m : a.m) require_positive(m, "m");
  const StatsContext sc = make_stats_context(ctx.config, a.cells);
  const ModulationReport r = modulation_detect(ctx.config, sc, a.t, a.m, ctx.stream, a.center);
  write_file(ctx.out / "modulation.csv",
             [&](std::ostream& os) { write_modulation_csv(os, r, ctx.hash, ctx.stream); });
  std::vector<double> K, est;
  for (const auto& row : r.rows) {
    K.push_back(static_cast<double>(row.K));
    est.push_back(row.estimate);
  }
  write_plot(ctx, "modulation.dat", "K", "kappa_minus_log_t", K, est);
  for (const auto& row : r.rows)
    std::cout << "K = " << row.K << ": kappa - log t = " << format_number(row.estimate) << " (target "
              << format_number(r.target_integral) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unimodal maps with heteroscedastic noise: simulation, filtering and limit laws"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "model configuration file")->required();
    sub->add_option("--seed", common.seed, "64-bit seed")->capture_default_str();
    sub->add_option("--out", common.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", common.threads, "worker threads (default: HETERODYN_THREADS, else 1)");
    sub->add_flag("--plot-data", common.plot_data, "also write two-column plot files");
  };

  auto* validate = app.add_subcommand("validate", "check the model assumptions");
  add_common(validate);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a trajectory");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--n", sim.n, "trajectory length")->capture_default_str();
  simulate_cmd->add_option("--x0", sim.x0, "initial state (default: stationary)");
  simulate_cmd->add_option("--burn-in", sim.burn_in, "burn-in steps for a stationary start")->capture_default_str();

  StationaryArgs st;
  auto* stationary = app.add_subcommand("stationary", "stationary density and spectral report");
  add_common(stationary);
  stationary->add_option("--cells", st.cells, "Ulam grid cells")->capture_default_str();
  stationary->add_option("--lags", st.lags, "correlation lags")->capture_default_str();
  stationary->add_flag("--ulam", st.ulam, "also write the kernel and density in ULAM binary form");

  FilterArgs fa;
  auto* filter = app.add_subcommand("filter", "filter stability experiment");
  add_common(filter);
  filter->add_option("--cells", fa.cells, "Ulam grid cells")->capture_default_str();
  filter->add_option("--n", fa.n, "observations")->capture_default_str();
  filter->add_option("--stride", fa.stride, "cell stride of the z0 scan")->capture_default_str();

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "CLT, large deviations and concentration");
  add_common(stats);
  stats->add_option("--cells", sa.cells, "Ulam grid cells")->capture_default_str();
  stats->add_option("--n", sa.n, "Birkhoff sum length")->capture_default_str();
  stats->add_option("--replicas", sa.replicas, "CLT replicas")->capture_default_str();
  stats->add_option("--lags", sa.lags, "lags in the variance series")->capture_default_str();
  stats->add_option("--conc-n", sa.conc_n, "trajectory lengths for concentration")->capture_default_str();
  stats->add_option("--conc-replicas", sa.conc_replicas, "replicas per length")->capture_default_str();

  EvtArgs ea;
  auto* evt = app.add_subcommand("evt", "Gumbel, Poisson, point process and GEV reports");
  add_common(evt);
  evt->add_option("--cells", ea.cells, "Ulam grid cells")->capture_default_str();
  evt->add_option("--t", ea.t, "time scale")->capture_default_str();
  evt->add_option("--replicas", ea.replicas, "replicas")->capture_default_str();
  evt->add_option("--tau", ea.taus, "tau values for the Gumbel check")->capture_default_str();
  evt->add_option("--center", ea.center, "ball centre (default: stationary mode)");
  evt->add_option("--blocks", ea.blocks, "blocks for the GEV fit")->capture_default_str();

  DetectArgs da;
  auto* detect = app.add_subcommand("detect-s", "detect the observational noise level from block maxima");
  add_common(detect);
  detect->add_option("--cells", da.cells, "Ulam grid cells")->capture_default_str();
  detect->add_option("--t", da.t, "block length")->capture_default_str();
  detect->add_option("--m", da.m, "block counts")->capture_default_str();
  detect->add_option("--center", da.center, "target centre (default: support midpoint)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line("usage", e.what());
    return 1;
  }

  try {
    const Context ctx = make_context(common);
    if (*validate) return run_validate(ctx);
    if (*simulate_cmd) return run_simulate(ctx, sim);
    if (*stationary) return run_stationary(ctx, st);
    if (*filter) return run_filter(ctx, fa);
    if (*stats) return run_stats(ctx, sa);
    if (*evt) return run_evt(ctx, ea);
    if (*detect) return run_detect(ctx, da);
  } catch (const Error& e) {
    fail_line(e.code(), e.what());
    return is_input_error(e) ? 1 : 2;
  } catch (const std::exception& e) {
    fail_line("internal", e.what());
    return 2;
  }
  return 1;
}
