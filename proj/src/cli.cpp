#include "brw/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "brw/acceptance.hpp"
#include "brw/continuum.hpp"
#include "brw/diagnostics.hpp"
#include "brw/estimators.hpp"
#include "brw/gw.hpp"
#include "brw/io.hpp"
#include "brw/lattice.hpp"
#include "brw/simulate.hpp"

namespace brw {

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

using json = nlohmann::json;

/// What a command hands back for writing.
struct Output {
  CsvTable table;
  json results = json::array();
  std::vector<std::string> warnings;
  /// Set by verify when a gating criterion fails.
  bool failed = false;
};

struct Runner {
  const ExperimentConfig& cfg;
  std::ostream& out;
  Output o;

  void result(const std::string& name, const json& value, const char* source) {
    o.results.push_back({{"name", name}, {"value", value}, {"source", source}, {"seed", cfg.seed}, {"tol", cfg.tol}});
  }

  ModelParams model() const { return make_model(parse_offspring_spec(cfg.offspring), parse_step_spec(cfg.step)); }
  double sigma(const ModelParams& m) const { return cfg.sigma > 0 ? cfg.sigma : std::sqrt(m.offspring.variance()); }
  double eta(const ModelParams& m) const { return cfg.eta > 0 ? cfg.eta : std::sqrt(m.step.variance()); }

  TailFunction solve(const ModelParams& m, std::int64_t x_max) {
    SolveOptions options;
    options.tol = cfg.tol;
    options.iter_cap = cfg.iter_cap;
    TailFunction u = solve_all_time_tail(m, x_max, options);
    o.warnings.insert(o.warnings.end(), u.warnings.begin(), u.warnings.end());
    result("iterations", u.iterations, "solver");
    result("residual", u.residual, "solver");
    result("error_estimate", u.error_estimate, "solver");
    return u;
  }

  void solve_tail() {
    const ModelParams m = model();
    const std::int64_t x_max = cfg.x_max > 0 ? cfg.x_max : 1024;
    const TailFunction u = solve(m, x_max);
    o.table.header = {"x", "u", "w", "w_beta2"};
    for (const PlateauPoint& p : plateau_scan(u, m.beta)) o.table.add(p.x, u(p.x), p.w, p.normalized);
    result("c_const", m.c_const, "laws");
    std::vector<std::int64_t> xs = cfg.xs.empty() ? std::vector<std::int64_t>{32, 64, 128, 256} : cfg.xs;
    std::erase_if(xs, [&](std::int64_t x) { return x > x_max; });
    std::vector<std::pair<double, double>> tail_points, w_points;
    for (const PlateauPoint& p : plateau_scan(u, m.beta, xs)) {
      tail_points.emplace_back(static_cast<double>(p.x), u(p.x));
      w_points.emplace_back(static_cast<double>(p.x), p.normalized);
    }
    if (tail_points.size() >= 3) {
      const PowerFit fit = tail_exponent_fit(tail_points);
      result("tail_slope", fit.slope, "estimators");
      result("tail_fit_r2", fit.r2, "estimators");
    }
    if (w_points.size() >= 4 && w_points.back().first >= 4 * w_points.front().first) {
      const Plateau plateau = plateau_constant(w_points);
      result("plateau_estimate", plateau.estimate, "estimators");
      result("plateau_trend", to_string(plateau.trend), "estimators");
    }
    out << "solved u on 1.." << x_max << " in " << u.iterations << " sweeps, residual " << u.residual << "\n";
  }

  SpaceTimeTail spacetime(const ModelParams& m, std::int64_t n_max, std::int64_t x_max) {
    SpaceTimeTail st = evolve_space_time_tail(m, n_max, x_max, false);
    o.warnings.insert(o.warnings.end(), st.warnings.begin(), st.warnings.end());
    return st;
  }

  void evolve() {
    const ModelParams m = model();
    const std::int64_t n = cfg.n > 0 ? cfg.n : 500;
    const std::int64_t x_max = cfg.x_max > 0 ? cfg.x_max : 400;
    const SpaceTimeTail st = spacetime(m, n, x_max);
    o.table.header = {"n", "x", "v"};
    for (std::int64_t x = -x_max; x <= x_max; ++x) o.table.add(n, x, st(n, x));
    result("q_n", st.q[n], "gw");
    out << "evolved v_n to n = " << n << ", q[n] = " << st.q[n] << "\n";
  }

  void conditional() {
    const ModelParams m = model();
    const std::int64_t n = cfg.n > 0 ? cfg.n : 500;
    const std::int64_t x_max = cfg.x_max > 0 ? cfg.x_max : 400;
    const ConditionalCdf g = conditional_cdf(spacetime(m, n, x_max), n);
    o.table.header = {"x_scaled", "G"};
    for (std::size_t i = 0; i < g.cdf.x.size(); ++i) o.table.add(g.cdf.x[i], g.cdf.value[i]);
    result("q_n", g.q_n, "gw");
    out << "conditional law of M_n/sqrt(n) at n = " << n << "\n";
  }

  void superposition() {
    const ModelParams m = model();
    const std::int64_t n = cfg.n > 0 ? cfg.n : 10'000;
    const std::vector<double> xs = cfg.xs_scaled.empty() ? std::vector<double>{1.0, 1.5, 2.0, 3.0} : cfg.xs_scaled;
    double widest = 0.0;
    for (double x : xs) widest = std::max(widest, x);
    const auto needed = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(n)) * widest)) + 1;
    const TailFunction u = solve(m, cfg.x_max > 0 ? cfg.x_max : std::max<std::int64_t>(1024, needed));
    o.table.header = {"x", "level", "solver", "limit", "diff"};
    for (double x : xs) {
      const double lhs = superposition_tail(u, n, x);
      const double rhs = -std::expm1(-m.c_const / (x * x));
      const auto level = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(n)) * x));
      o.table.add(x, level, lhs, rhs, lhs - rhs);
    }
    out << "superposition of " << n << " trees at " << xs.size() << " points\n";
  }

  void simulate() {
    const ModelParams m = model();
    const std::vector<std::int64_t> xs = cfg.xs.empty() ? std::vector<std::int64_t>{8, 16, 32} : cfg.xs;
    const TailEstimate est = estimate_tail(m, cfg.trees, cfg.gen_cap, xs, cfg.seed, cfg.threads);
    o.table.header = {"x", "hits", "trees", "p_hat", "se", "ci_low", "ci_high", "bias_bound", "seed"};
    for (const auto& r : est.rows) {
      const Interval ci = bernoulli_ci(r.hits, r.trees);
      o.table.add(r.x, r.hits, r.trees, r.p_hat, r.se, ci.low, ci.high, r.bias_bound, cfg.seed);
    }
    result("censored", est.censored, "monte_carlo");
    if (est.censored > 0) {
      o.warnings.push_back(std::to_string(est.censored) + " trees alive at gen_cap; tail estimates may be low by " +
                           format_number(est.rows.empty() ? 0.0 : est.rows.front().bias_bound));
    }
    out << "simulated " << cfg.trees << " trees, " << est.censored << " censored\n";
  }

  void survival() {
    const OffspringLaw law = parse_offspring_spec(cfg.offspring);
    const std::int64_t n = cfg.n > 0 ? cfg.n : 100'000;
    const SurvivalTable table = survival_probabilities(law, n);
    const Eigen::VectorXd k = kolmogorov_diagnostic(table);
    o.table.header = {"n", "q_n", "normalized"};
    for (std::int64_t i = 1; i <= n; ++i) o.table.add(i, table.q[i], k[i]);
    result("kolmogorov_at_n", k[n], "gw");
    out << "n q[n] sigma^2/2 at n = " << n << ": " << k[n] << "\n";
  }

  PhiProfile profile(double s, double e) {
    const double y_max = cfg.y_max > 0 ? cfg.y_max : 10.0 * std::sqrt(6.0) * e / s;
    return solve_phi_shooting(s, e, y_max, cfg.tol);
  }

  void ode_check() {
    const ModelParams m = model();
    const double s = sigma(m), e = eta(m);
    const PhiProfile phi = profile(s, e);
    o.table.header = {"y", "phi_shooting", "phi_closed", "diff"};
    double sup = 0.0;
    for (Eigen::Index i = 0; i < phi.y.size(); ++i) {
      const double exact = phi_closed_form(phi.y[i], s, e);
      sup = std::max(sup, std::abs(phi.phi[i] - exact));
      o.table.add(phi.y[i], phi.phi[i], exact, phi.phi[i] - exact);
    }
    result("slope0", phi.slope0, "continuum");
    result("slope0_exact", -2.0 * phi_beta(s, e), "continuum");
    result("sup_diff", sup, "continuum");
    result("bisection_steps", phi.bisection_steps, "continuum");
    out << "shooting slope " << phi.slope0 << ", sup |shooting - closed form| " << sup << "\n";
  }

  void pde_check() {
    const ModelParams m = model();
    const double s = sigma(m), e = eta(m);
    const double c = cfg.reaction > 0 ? cfg.reaction : 0.5 * s * s;
    const double top = 2.0 / (s * s);
    const Eigen::Index points = 201;
    const double dx = 0.1, x0 = -10.0;
    const PdeState flat = pde_evolve(make_pde_state(1.0, x0, dx, Eigen::VectorXd::Constant(points, top)), 2.0, s, e,
                                     cfg.reaction > 0 ? std::optional(cfg.reaction) : std::nullopt);
    Eigen::VectorXd front(points);
    for (Eigen::Index i = 0; i < points; ++i) front[i] = top * 0.5 * std::erfc(x0 + dx * static_cast<double>(i));
    const PdeState moved = pde_evolve(make_pde_state(1.0, x0, dx, front), 2.0, s, e,
                                      cfg.reaction > 0 ? std::optional(cfg.reaction) : std::nullopt);
    const double exact = 1.0 / (1.0 / top + c);
    o.table.header = {"x", "flat_pde", "flat_exact", "front_pde"};
    double flat_err = 0.0;
    bool monotone = true;
    for (Eigen::Index i = 0; i < points; ++i) {
      flat_err = std::max(flat_err, std::abs(flat.values[i] - exact));
      if (i > 0 && moved.values[i] > moved.values[i - 1] + 1e-15) monotone = false;
      o.table.add(flat.x[i], flat.values[i], exact, moved.values[i]);
    }
    const bool enveloped = moved.values.maxCoeff() <= exact * (1.0 + 1e-12);
    result("flat_sup_error", flat_err, "continuum");
    result("t_phi_at_t2", 2.0 * flat.values[0], "continuum");
    result("front_monotone", monotone, "continuum");
    result("front_below_envelope", enveloped, "continuum");
    if (!monotone) o.warnings.push_back("evolved front lost monotonicity");
    if (!enveloped) o.warnings.push_back("evolved front exceeds the flat envelope");
    out << "flat solution error " << flat_err << ", front monotone " << (monotone ? "yes" : "no") << "\n";
  }

  void cross_scale() {
    const ModelParams m = model();
    const std::int64_t n = cfg.n > 0 ? cfg.n : 500;
    const std::int64_t x_max = cfg.x_max > 0 ? cfg.x_max : 400;
    const SpaceTimeTail st = spacetime(m, 2 * n, x_max);
    const CrossScaleReport r = cross_scale_check(st, n, sigma(m), eta(m),
                                                 cfg.reaction > 0 ? std::optional(cfg.reaction) : std::nullopt);
    o.table.header = {"x", "value_recursion", "value_pde", "diff"};
    for (Eigen::Index i = 0; i < r.x.size(); ++i) o.table.add(r.x[i], r.value_recursion[i], r.value_pde[i], r.diff[i]);
    result("sup_discrepancy", r.sup_discrepancy, "continuum");
    result("relative_discrepancy", r.relative_discrepancy, "continuum");
    result("reaction", r.reaction, "continuum");
    out << "relative sup discrepancy at n = " << n << ": " << r.relative_discrepancy << "\n";
  }

  void martingale() {
    const ModelParams m = model();
    const TailFunction u = solve(m, cfg.x_max > 0 ? cfg.x_max : 1024);
    const MartingaleEstimate est = martingale_optional_stopping_check(m, u, cfg.start_x, cfg.paths, cfg.seed,
                                                                      cfg.threads);
    const Fund2Report f = fund2_identity_check(m, u);
    o.table.header = {"start_x", "paths", "estimate", "se", "u", "z", "min_y", "max_y", "exited_grid", "seed"};
    o.table.add(est.start_x, est.paths, est.estimate, est.se, est.u_start, est.z, est.min_y, est.max_y,
                est.exited_grid, cfg.seed);
    result("one_step_identity_max", f.max_abs, "diagnostics");
    result("one_step_identity_holds", f.holds, "diagnostics");
    if (!f.holds) o.warnings.push_back("one-step identity exceeds the solver residual");
    out << "optional stopping estimate " << est.estimate << " +- " << est.se << " vs u = " << est.u_start << "\n";
  }

  void overshoot() {
    const StepLaw step = parse_step_spec(cfg.step);
    const std::vector<std::int64_t> heights =
        cfg.heights.empty() ? std::vector<std::int64_t>{100, 1000, 10000} : cfg.heights;
    OvershootOptions options;
    options.mode = cfg.mode == "direct" ? OvershootMode::Direct : OvershootMode::Ladder;
    options.threads = cfg.threads;
    const OvershootTable t = overshoot_statistics(step, heights, cfg.paths, cfg.seed, options);
    o.table.header = {"height", "paths", "censored", "mean", "second_moment", "se_mean", "seed"};
    for (const auto& r : t.rows) {
      o.table.add(r.height, r.paths, r.censored, r.mean, r.second_moment, r.se_mean, cfg.seed);
      if (r.censored > 0) o.warnings.push_back(std::to_string(r.censored) + " walks censored at height " +
                                               std::to_string(r.height));
    }
    result("ladder_pool", t.pool_size, "diagnostics");
    result("ladder_pool_completed", t.pool_completed, "diagnostics");
    out << "overshoot moments at " << heights.size() << " heights (" << cfg.mode << ")\n";
  }

  void fk_brownian() {
    const ModelParams m = model();
    const double s = sigma(m), e = eta(m);
    const PhiProfile phi = profile(s, e);
    FkOptions options;
    options.threads = cfg.threads;
    const FkEstimate est = brownian_fk_estimate(phi, cfg.y, cfg.dt, cfg.paths, cfg.seed, options);
    o.table.header = {"y", "estimate", "se", "phi_shooting", "phi_closed", "allowance", "floored", "capped", "seed"};
    o.table.add(cfg.y, est.estimate, est.se, phi(cfg.y), phi_closed_form(cfg.y, s, e), est.allowance, est.floored,
                est.capped, cfg.seed);
    result("floor_bias", est.floor_bias, "diagnostics");
    out << "Brownian estimate " << est.estimate << " +- " << est.se << " vs phi(y) = " << phi(cfg.y) << "\n";
  }

  void heavy_tail_report() {
    const ModelParams m = make_model(parse_offspring_spec(cfg.offspring), heavy_tail_step_law(cfg.eps, cfg.cutoff));
    const TailFunction u = solve(m, cfg.x_max > 0 ? cfg.x_max : 512);
    std::vector<std::int64_t> xs = cfg.xs.empty() ? std::vector<std::int64_t>{32, 64, 128, 256} : cfg.xs;
    o.table.header = {"x", "u", "w_beta2"};
    std::vector<std::pair<double, double>> w;
    for (const PlateauPoint& p : plateau_scan(u, m.beta, xs)) {
      o.table.add(p.x, u(p.x), p.normalized);
      w.emplace_back(static_cast<double>(p.x), p.normalized);
    }
    const Plateau plateau = plateau_constant(w);
    result("plateau_estimate", plateau.estimate, "estimators");
    result("plateau_trend", to_string(plateau.trend), "estimators");
    out << "w(x) beta^2 under " << m.step.label() << ": " << to_string(plateau.trend) << ", last "
        << plateau.estimate << "\n";
  }

  void verify() {
    AcceptanceOptions options;
    options.seed = cfg.seed;
    options.threads = cfg.threads;
    o.table.header = {"id", "title", "gating", "passed", "detail"};
    const auto results = run_acceptance(options, [this](const CriterionResult& r) {
      out << format_result_line(r) << std::endl;
      o.table.add(r.id, r.title, r.gating, r.passed, r.detail);
      if (r.gating && !r.passed) o.failed = true;
    });
    result("criteria_run", static_cast<std::int64_t>(results.size()), "acceptance");
  }

  void dispatch() {
    const std::string& c = cfg.command;
    if (c == "solve-tail") solve_tail();
    else if (c == "evolve") evolve();
    else if (c == "conditional") conditional();
    else if (c == "superposition") superposition();
    else if (c == "simulate") simulate();
    else if (c == "survival") survival();
    else if (c == "ode-check") ode_check();
    else if (c == "pde-check") pde_check();
    else if (c == "cross-scale") cross_scale();
    else if (c == "martingale") martingale();
    else if (c == "overshoot") overshoot();
    else if (c == "fk-brownian") fk_brownian();
    else if (c == "heavy-tail-report") heavy_tail_report();
    else if (c == "verify") verify();
    else throw Error(Errc::UnknownCommand, "unknown command '" + c + "'");
  }
};

std::string output_stem(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (!cfg.out.empty()) {
    fs::path p(cfg.out);
    return p.replace_extension().string();
  }
  std::string dir = cfg.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("BRW_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  return (fs::path(dir) / cfg.command).string();
}

json table_json(const CsvTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(r);
  return {{"columns", t.header}, {"rows", rows}};
}

void add_options(CLI::App* sub, ExperimentConfig& cfg, const std::string& name) {
  auto has = [&name](std::initializer_list<const char*> commands) {
    for (const char* c : commands)
      if (name == c) return true;
    return false;
  };
  if (!has({"verify"})) sub->add_option("--offspring", cfg.offspring, "offspring law spec");
  if (!has({"verify", "survival", "heavy-tail-report"})) sub->add_option("--step", cfg.step, "step law spec");
  if (has({"solve-tail", "evolve", "conditional", "superposition", "cross-scale", "martingale", "heavy-tail-report"}))
    sub->add_option("--xmax", cfg.x_max, "grid size");
  if (has({"solve-tail", "superposition", "martingale", "heavy-tail-report", "ode-check", "fk-brownian"}))
    sub->add_option("--tol", cfg.tol, "solver tolerance");
  if (has({"solve-tail", "superposition", "martingale", "heavy-tail-report"}))
    sub->add_option("--iter-cap", cfg.iter_cap, "sweep cap (0: 50 xmax^2)");
  if (has({"simulate"})) {
    sub->add_option("--trees", cfg.trees, "number of trees");
    sub->add_option("--gen-cap", cfg.gen_cap, "generation cap");
  }
  if (has({"evolve", "conditional", "superposition", "cross-scale"})) sub->add_option("--n", cfg.n, "n");
  if (has({"survival"})) sub->add_option("--n,--n-max", cfg.n, "last generation");
  if (has({"martingale", "overshoot", "fk-brownian"})) sub->add_option("--paths", cfg.paths, "number of paths");
  if (has({"martingale"})) sub->add_option("--x", cfg.start_x, "start position");
  if (has({"fk-brownian"})) {
    sub->add_option("--y", cfg.y, "start height");
    sub->add_option("--dt", cfg.dt, "Euler step");
  }
  if (has({"ode-check", "fk-brownian"})) sub->add_option("--ymax", cfg.y_max, "profile length");
  if (has({"ode-check", "pde-check", "cross-scale", "fk-brownian"})) {
    sub->add_option("--sigma", cfg.sigma, "offspring standard deviation (default: from the law)");
    sub->add_option("--eta", cfg.eta, "step standard deviation (default: from the law)");
  }
  if (has({"pde-check", "cross-scale"})) sub->add_option("--reaction", cfg.reaction, "reaction coefficient");
  if (has({"solve-tail", "simulate", "heavy-tail-report"})) sub->add_option("--xs", cfg.xs, "levels x, comma separated")->delimiter(',');
  if (has({"superposition"})) sub->add_option("--xs", cfg.xs_scaled, "scaled levels")->delimiter(',');
  if (has({"overshoot"})) {
    sub->add_option("--heights", cfg.heights, "start heights")->delimiter(',');
    sub->add_option("--mode", cfg.mode, "ladder or direct");
  }
  if (has({"heavy-tail-report"})) {
    sub->add_option("--eps", cfg.eps, "moment deficit");
    sub->add_option("--cutoff", cfg.cutoff, "largest jump");
  }
  sub->add_option("--out", cfg.out, "output file, or csv/json to pick the format");
}

}  // namespace

namespace {

constexpr const char* kLawHelp =
    "Law specs:\n"
    "  offspring  don | geom | poisson | table:k=p,...\n"
    "             geom and poisson are truncated at k = 60 and renormalized\n"
    "  step       rademacher | lazy:q=Q | table:x=p,... | heavy:eps=E,cutoff=N\n"
    "             heavy: a_x ~ |x|^-(5-E) on 1 <= |x| <= N, N >= 1000\n"
    "Exit codes: 0 ok, 2 config error, 3 warning under --strict or failed verify, 4 runtime failure";

std::string describe(const std::string& name) {
  if (name == "solve-tail") return "all-time tail u(x) = P{M >= x} by monotone iteration";
  if (name == "evolve") return "space-time tail v_n(x) = P{M_n >= x}";
  if (name == "conditional") return "law of M_n / sqrt(n) given survival to generation n";
  if (name == "superposition") return "maximum over n trees vs 1 - exp(-C/x^2)";
  if (name == "simulate") return "Monte Carlo tail estimates with Wilson intervals";
  if (name == "survival") return "survival probabilities q[n] and n q[n] sigma^2/2";
  if (name == "ode-check") return "shooting solution of the profile ODE vs the closed form";
  if (name == "pde-check") return "flat and front solutions of the reaction-diffusion equation";
  if (name == "cross-scale") return "rescaled recursion at n and 2n vs the PDE";
  if (name == "martingale") return "optional stopping of the product martingale";
  if (name == "overshoot") return "overshoot moments of the reflected walk";
  if (name == "fk-brownian") return "Brownian Feynman-Kac estimate of the profile";
  if (name == "heavy-tail-report") return "w(x) beta^2 for a heavy-tailed step law";
  if (name == "verify") return "run every acceptance check and print PASS/FAIL";
  return "";
}

struct HelpRequested {
  std::string text;
};

/// Parses into cfg; CLI11 errors other than help requests become brw errors.
ExperimentConfig parse_impl(int argc, const char* const* argv, std::string& save_path) {
  ExperimentConfig cfg;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) cfg = load_config(argv[i + 1]);
    else if (arg.rfind("--config=", 0) == 0) cfg = load_config(arg.substr(9));
  }
  const std::string from_file = cfg.command;

  CLI::App app{"Maximal displacement of critical branching random walks"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--save-config", save_path, "write the resolved config as JSON");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--threads", cfg.threads, "worker threads");
  app.add_option("--out-dir", cfg.out_dir, "output directory (default $BRW_OUT_DIR or .)");
  app.add_option("--format", cfg.format, "csv or json");
  app.add_flag("--strict", cfg.strict, "treat numerical warnings as failures");
  for (const std::string& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->footer(kLawHelp);
    add_options(sub, cfg, name);
  }
  app.footer(kLawHelp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ExtrasError& e) {
    throw Error(Errc::UnknownCommand, e.what());
  } catch (const CLI::ParseError& e) {
    throw Error(Errc::BadNumeric, e.what());
  }
  const auto subs = app.get_subcommands();
  cfg.command = subs.empty() ? from_file : subs.front()->get_name();
  if (cfg.command.empty()) throw Error(Errc::UnknownCommand, "no command given");
  if (cfg.out == "csv" || cfg.out == "json") {
    cfg.format = cfg.out;
    cfg.out.clear();
  }
  validate(cfg);
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(int argc, const char* const* argv) {
  std::string save_path;
  try {
    return parse_impl(argc, argv, save_path);
  } catch (const HelpRequested&) {
    throw Error(Errc::UnknownCommand, "help requested");
  }
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Runner runner{cfg, out, {}};
  try {
    runner.dispatch();
    const std::string stem = output_stem(cfg);
    const std::string data_path = stem + (cfg.format == "json" ? ".json" : ".csv");
    const std::string manifest_path = stem + ".manifest.json";
    if (cfg.format == "json") write_file_atomic(data_path, table_json(runner.o.table).dump(2) + "\n");
    else write_file_atomic(data_path, to_csv(runner.o.table));

    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["command"] = cfg.command;
    manifest["config"] = cfg;
    manifest["data_file"] = std::filesystem::path(data_path).filename().string();
    manifest["columns"] = runner.o.table.header;
    manifest["results"] = runner.o.results;
    manifest["warnings"] = runner.o.warnings;
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    out << "wrote " << data_path << " and " << manifest_path << "\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::UnknownCommand:
      case Errc::BadLawSpec:
      case Errc::BadNumeric: return kExitConfig;
      default: return kExitRuntime;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  for (const std::string& w : runner.o.warnings) err << "warning: " << w << "\n";
  if (runner.o.failed) return kExitWarning;
  if (cfg.strict && !runner.o.warnings.empty()) return kExitWarning;
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  std::string save_path;
  try {
    cfg = parse_impl(argc, argv, save_path);
    if (!save_path.empty()) write_file_atomic(save_path, json(cfg).dump(2) + "\n");
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == Errc::IoFailure ? kExitRuntime : kExitConfig;
  }
  return run_experiment(cfg, out, err);
}

}  // namespace brw
