#include "fockblock/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "fockblock/cli/config.hpp"
#include "fockblock/cli/csv.hpp"
#include "fockblock/cli/hash.hpp"
#include "fockblock/dynamics.hpp"
#include "fockblock/lindblad.hpp"
#include "fockblock/model.hpp"
#include "fockblock/protocol.hpp"
#include "fockblock/semiclassical.hpp"
#include "fockblock/spectral.hpp"

namespace fockblock::cli {

namespace {

using json = nlohmann::json;
using Sections = std::map<std::string, std::set<std::string>>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Checks {
  double trace_drift = 0;
  double leakage = 0;
  bool converged = true;

  void merge(const Checks& o) {
    trace_drift = std::max(trace_drift, o.trace_drift);
    leakage = std::max(leakage, o.leakage);
    converged = converged && o.converged;
  }
};

struct Point {
  std::map<std::string, CsvTable> tables;  // "main" plus optional extras
  json results = json::object();
  Checks checks;
};

struct Context {
  const RunOptions& opts;
  std::size_t inner_workers;
};

using Runner = std::function<Point(const Config&, const Context&)>;

struct CommandDef {
  std::string name;
  std::vector<std::string> sections;
  Runner run;
};

const Sections& all_keys() {
  static const Sections keys = {
      {"model", {"Lambda3", "U", "kappa", "r", "delta_lambda1", "Lambda2_mismatch", "Delta_mismatch", "dim"}},
      {"time", {"t0", "t1", "stride"}},
      {"integrator",
       {"method", "rtol", "atol", "max_step", "leakage_budget", "convergence_check", "convergence_tol"}},
      {"sweep", {"param", "values"}},
      {"initial", {"state", "n", "alpha"}},
      {"noise", {"kind", "sigma"}},
      {"protocol", {"tau_block", "target_p1"}},
      {"escape", {"method", "window_start", "window_end", "steady_reference"}},
      {"antiresonance", {"min_offset", "max_offset", "per_side"}},
      {"spectrum", {"eigenvalues"}},
      {"semiclassical", {"random_seeds"}},
      {"channel", {"alpha", "sigma", "samples", "dim"}},
      {"tune", {"row"}},
  };
  return keys;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json cnum(cplx v) { return json::array({num(v.real()), num(v.imag())}); }

const Entry& required(const Config& cfg, const std::string& section, const std::string& key) {
  const Entry* e = cfg.find(section, key);
  if (!e) throw ConfigError("missing required key '" + key + "' in [" + section + "]", 0);
  return *e;
}

double required_double(const Config& cfg, const std::string& section, const std::string& key) {
  const Entry& e = required(cfg, section, key);
  return parse_double(e.value, e.line);
}

// Library errors raised while interpreting a keyed value get its line.
template <class F>
auto at_line(const Config& cfg, const std::string& section, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    const Entry* entry = cfg.find(section, key);
    throw ConfigError(e.what(), entry ? entry->line : 0);
  }
}

Truncation truncation(const Config& cfg, const std::string& section = "model") {
  const long dim = at_line(cfg, section, "dim", [&] {
    const Entry& e = required(cfg, section, "dim");
    const double v = parse_double(e.value, e.line);
    if (v != std::floor(v)) throw ConfigError("dim must be an integer", e.line);
    return long(v);
  });
  return at_line(cfg, section, "dim", [&] { return Truncation(dim); });
}

BlockadeSpec blockade_spec(const Config& cfg) {
  BlockadeSpec s;
  const Entry& l3 = required(cfg, "model", "Lambda3");
  s.Lambda3Tilde = parse_complex(l3.value, l3.line);
  s.U = required_double(cfg, "model", "U");
  s.kappa = cfg.get_double("model", "kappa", 1.0);
  s.r = cfg.get_double("model", "r", 1.0);
  s.deltaLambda1 = cfg.get_complex("model", "delta_lambda1", {0, 0});
  s.Lambda2Mismatch = cfg.get_complex("model", "Lambda2_mismatch", {0, 0});
  s.DeltaMismatch = cfg.get_double("model", "Delta_mismatch", 0.0);
  if (!(s.kappa >= 0)) throw ConfigError("kappa must be >= 0", required(cfg, "model", "kappa").line);
  return s;
}

LindbladGenerator generator(const BlockadeSpec& s, Truncation t) {
  return LindbladGenerator::cavity(build_target_hamiltonian(s, t), s.kappa);
}

EvolveOptions evolve_options(const Config& cfg) {
  EvolveOptions o;
  const std::string method = cfg.get_string("integrator", "method", "auto");
  if (method == "auto") o.integrator.method = Method::kAuto;
  else if (method == "explicit") o.integrator.method = Method::kExplicit;
  else if (method == "implicit") o.integrator.method = Method::kImplicit;
  else throw ConfigError("method must be auto, explicit or implicit", required(cfg, "integrator", "method").line);
  o.integrator.rtol = cfg.get_double("integrator", "rtol", o.integrator.rtol);
  o.integrator.atol = cfg.get_double("integrator", "atol", o.integrator.atol);
  o.integrator.max_step = cfg.get_double("integrator", "max_step", o.integrator.max_step);
  o.leakage_budget = cfg.get_double("integrator", "leakage_budget", o.leakage_budget);
  o.convergence_check = cfg.get_bool("integrator", "convergence_check", false);
  return o;
}

TimeGrid time_grid(const Config& cfg) {
  const double t0 = cfg.get_double("time", "t0", 0.0);
  const double t1 = required_double(cfg, "time", "t1");
  const double stride = required_double(cfg, "time", "stride");
  return at_line(cfg, "time", "t1", [&] { return TimeGrid(t0, t1, stride); });
}

DensityMatrix initial_density(const Config& cfg, Truncation t) {
  const std::string state = cfg.get_string("initial", "state", "vacuum");
  return at_line(cfg, "initial", "state", [&] {
    if (state == "vacuum") return DensityMatrix::fock(0, t);
    if (state == "fock") return DensityMatrix::fock(cfg.get_int("initial", "n", 0), t);
    if (state == "coherent")
      return DensityMatrix::pure(coherent_state(cfg.get_complex("initial", "alpha", {0, 0}), t));
    throw ConfigError("state must be vacuum, fock or coherent", required(cfg, "initial", "state").line);
  });
}

Checks evolve_checks(const EvolveResult& res, const Config& cfg, const EvolveOptions& o) {
  Checks c;
  c.trace_drift = res.checks.max_trace_drift;
  c.leakage = res.checks.max_leakage;
  c.converged = res.checks.ok(o.leakage_budget);
  if (o.convergence_check) {
    const double tol = cfg.get_double("integrator", "convergence_tol", 1e-6);
    c.converged = c.converged && res.checks.convergence_delta <= tol;
  }
  return c;
}

json evolve_stats(const EvolveResult& res) {
  const auto& s = res.checks.stats;
  return {{"method", to_string(s.method)},
          {"steps", s.steps},
          {"rejected", s.rejected},
          {"min_eigenvalue", num(res.checks.min_eigenvalue)},
          {"max_hermiticity_error", num(res.checks.max_hermiticity_error)},
          {"convergence_delta", num(res.checks.convergence_delta)}};
}

CsvTable series_table(const ObservableSeries& s) {
  CsvTable t({"t", "n_mean", "g2", "P0", "P1", "P2", "leak_top3"});
  for (std::size_t k = 0; k < s.size(); ++k)
    t.add_row({fmt(s.times[k]), fmt(s.n_mean[k]), fmt(s.g2[k]), fmt(s.P0[k]), fmt(s.P1[k]), fmt(s.P2[k]),
               fmt(s.leak_top3[k])});
  return t;
}

// ---- commands ----

Point run_tune(const Config& cfg, const Context&) {
  Point p;
  CsvTable t({"line", "Lambda3_re", "Lambda3_im", "U", "kappa", "r", "alpha_b_re", "alpha_b_im", "Lambda1_b_re",
              "Lambda1_b_im", "Lambda2_b_re", "Lambda2_b_im", "Delta_b", "error"});
  json errors = json::array();
  for (const Entry& e : cfg.all("tune", "row")) {
    std::istringstream in(e.value);
    std::vector<std::string> f;
    for (std::string w; in >> w;) f.push_back(w);
    if (f.size() != 4) throw ConfigError("row needs 4 fields: Lambda3 U kappa r", e.line);
    const cplx l3 = parse_complex(f[0], e.line);
    const double U = parse_double(f[1], e.line), kappa = parse_double(f[2], e.line), r = parse_double(f[3], e.line);
    std::vector<std::string> row = {std::to_string(e.line), fmt(l3.real()), fmt(l3.imag()), fmt(U), fmt(kappa),
                                    fmt(r)};
    try {
      const TunedDrives d = tune_drives(l3, U, kappa, r);
      for (double v : {d.alpha_b.real(), d.alpha_b.imag(), d.Lambda1_b.real(), d.Lambda1_b.imag(),
                       d.Lambda2_b.real(), d.Lambda2_b.imag(), d.Delta_b})
        row.push_back(fmt(v));
      row.push_back("");
    } catch (const Error& err) {
      for (int k = 0; k < 7; ++k) row.push_back(fmt(kNaN));
      row.push_back(err.code());
      errors.push_back({{"line", e.line}, {"code", err.code()}, {"message", err.what()}});
    }
    t.add_row(std::move(row));
  }
  p.tables.emplace("main", std::move(t));
  p.results = {{"rows", cfg.all("tune", "row").size()}, {"errors", errors}};
  return p;
}

Point run_evolve(const Config& cfg, const Context&) {
  const BlockadeSpec s = blockade_spec(cfg);
  const Truncation tr = truncation(cfg);
  const EvolveOptions o = evolve_options(cfg);
  const EvolveResult res = evolve(generator(s, tr), initial_density(cfg, tr), time_grid(cfg), o);
  Point p;
  p.tables.emplace("main", series_table(res.series));
  const auto& ser = res.series;
  p.results = {{"final_n_mean", num(ser.n_mean.back())},
               {"final_g2", num(ser.g2.back())},
               {"final_P1", num(ser.P1.back())},
               {"max_P_ge2", num(*std::max_element(ser.P_ge2.begin(), ser.P_ge2.end()))},
               {"integrator", evolve_stats(res)}};
  p.checks = evolve_checks(res, cfg, o);
  return p;
}

Point run_steady(const Config& cfg, const Context&) {
  const BlockadeSpec s = blockade_spec(cfg);
  const Truncation tr = truncation(cfg);
  const LindbladGenerator gen = generator(s, tr);
  const DensityMatrix rho = steady_state(gen);
  const Moments m = moments(rho);
  double g2 = kNaN;
  try {
    g2 = g2_from_moments(m);
  } catch (const UndefinedG2&) {
  }
  const double residual = steady_state_residual(gen, rho.matrix());
  const double pge2 = std::max(0.0, 1.0 - rho.population(0) - rho.population(1));
  const double p1_analytic = s.kappa > 0 ? steady_p1_analytic(s.Lambda3Tilde, s.kappa) : kNaN;
  CsvTable t({"n_mean", "g2", "P0", "P1", "P2", "P_ge2", "P1_weak_drive", "residual"});
  t.add_row({fmt(m.n), fmt(g2), fmt(rho.population(0)), fmt(rho.population(1)), fmt(rho.population(2)), fmt(pge2),
             fmt(p1_analytic), fmt(residual)});
  Point p;
  p.tables.emplace("main", std::move(t));
  p.results = {{"n_mean", num(m.n)}, {"g2", num(g2)}, {"P1", num(rho.population(1))}, {"residual", num(residual)}};
  p.checks.trace_drift = std::abs(rho.trace() - 1.0);
  p.checks.leakage = pge2;
  // DensityMatrix construction already validated the state
  p.checks.converged = residual <= SteadyStateOptions{}.residual_tol;
  return p;
}

Point run_spectrum(const Config& cfg, const Context&) {
  const BlockadeSpec s = blockade_spec(cfg);
  const Truncation tr = truncation(cfg);
  const LindbladGenerator gen = generator(s, tr);
  const GapResult g = dissipative_gap(gen);
  double slow = kNaN, alpha_sq = kNaN;
  try {
    slow = gamma_slow_perturbative(s);
    alpha_sq = std::norm(alpha_ha_perturbative(s));
  } catch (const Error&) {
  }
  CsvTable t({"gap", "eig_re", "eig_im", "residual", "gamma_slow_perturbative", "alpha_ha_sq"});
  t.add_row({fmt(g.gap), fmt(g.eigenvalue.real()), fmt(g.eigenvalue.imag()), fmt(g.residual), fmt(slow),
             fmt(alpha_sq)});
  Point p;
  p.tables.emplace("main", std::move(t));
  json near = json::array();
  for (cplx z : g.near_zero) near.push_back(cnum(z));
  p.results = {{"gap", num(g.gap)}, {"method", g.method}, {"restarts", g.restarts}, {"near_zero", near}};
  if (cfg.get_bool("spectrum", "eigenvalues", false)) {
    const Eigen::VectorXcd ev = liouvillian_spectrum(gen);
    std::vector<cplx> sorted(ev.data(), ev.data() + ev.size());
    std::sort(sorted.begin(), sorted.end(), [](cplx a, cplx b) {
      return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    CsvTable e({"index", "re", "im"});
    for (std::size_t k = 0; k < sorted.size(); ++k)
      e.add_row({std::to_string(k), fmt(sorted[k].real()), fmt(sorted[k].imag())});
    p.tables.emplace("eigenvalues", std::move(e));
  }
  p.checks.converged = g.residual <= 1e-6 * std::max(1.0, gen.total_rate());
  return p;
}

Point run_semiclassical(const Config& cfg, const Context&) {
  const BlockadeSpec s = blockade_spec(cfg);
  FixedPointOptions fo;
  fo.random_seeds = int(cfg.get_int("semiclassical", "random_seeds", fo.random_seeds));
  const FixedPointSearch found = find_fixed_points(s, fo);
  CsvTable t({"alpha_re", "alpha_im", "stable", "residual", "eig1_re", "eig1_im", "eig2_re", "eig2_im"});
  for (const FixedPoint& f : found.points)
    t.add_row({fmt(f.alpha.real()), fmt(f.alpha.imag()), fmt(f.stable), fmt(f.residual),
               fmt(f.jacobian_eigs[0].real()), fmt(f.jacobian_eigs[0].imag()), fmt(f.jacobian_eigs[1].real()),
               fmt(f.jacobian_eigs[1].imag())});
  Point p;
  p.tables.emplace("main", std::move(t));
  p.results = {{"fixed_points", found.points.size()},
               {"seed_failures", found.failures.size()},
               {"perturbative_regime", perturbative_regime(s)}};
  if (s.kappa >= 0 && std::abs(s.Lambda3Tilde) > 0) {
    try {
      const auto eig = stability_eigenvalues_analytic(s);
      p.results["alpha_ha_perturbative"] = cnum(alpha_ha_perturbative(s));
      p.results["eigs_perturbative"] = json::array({cnum(eig[0]), cnum(eig[1])});
    } catch (const Error&) {
    }
  }
  p.checks.converged = !found.points.empty();
  return p;
}

Point run_escape(const Config& cfg, const Context&) {
  const BlockadeSpec s = blockade_spec(cfg);
  const Truncation tr = truncation(cfg);
  const std::string method = cfg.get_string("escape", "method", "fit");
  Point p;
  if (method == "fgr") {
    const FgrRate f = at_line(cfg, "model", "dim", [&] { return fgr_escape_rate(s, tr); });
    CsvTable t({"gamma_esc", "c", "groups", "unblockaded", "regime_ok"});
    t.add_row({fmt(f.gamma_esc), fmt(f.c), std::to_string(f.groups), std::to_string(f.unblockaded),
               fmt(f.regime_ok)});
    CsvTable b({"energy", "gamma", "c"});
    for (const FgrBranch& br : f.branches) b.add_row({fmt(br.energy), fmt(br.gamma), fmt(br.c)});
    p.tables.emplace("main", std::move(t));
    p.tables.emplace("branches", std::move(b));
    p.results = {{"method", "fgr"}, {"gamma_esc", num(f.gamma_esc)}, {"c", num(f.c)}, {"regime_ok", f.regime_ok}};
    p.checks.converged = f.regime_ok;
    return p;
  }
  if (method != "fit") throw ConfigError("method must be fit or fgr", required(cfg, "escape", "method").line);
  const LindbladGenerator gen = generator(s, tr);
  const EvolveOptions o = evolve_options(cfg);
  const EvolveResult res = evolve(gen, DensityMatrix::fock(0, tr), time_grid(cfg), o);
  EscapeFitOptions fo;
  fo.window_start = cfg.get_double("escape", "window_start", kNaN);
  fo.window_end = cfg.get_double("escape", "window_end", kNaN);
  if (cfg.get_bool("escape", "steady_reference", true)) fo.n_steady = moments(steady_state(gen)).n;
  const EscapeFit f = fit_escape_rate(res.series, s.delta_Lambda1_abs(), s.kappa, fo);
  CsvTable t({"gamma_esc", "c", "n_plateau", "window_start", "window_end", "rms_residual", "points", "rejected"});
  t.add_row({fmt(f.gamma_esc), fmt(f.c), fmt(f.n_plateau), fmt(f.window_start), fmt(f.window_end),
             fmt(f.rms_residual), std::to_string(f.points), fmt(f.rejected)});
  p.tables.emplace("main", std::move(t));
  p.tables.emplace("series", series_table(res.series));
  p.results = {{"method", "fit"},        {"gamma_esc", num(f.gamma_esc)}, {"c", num(f.c)},
               {"rejected", f.rejected}, {"reason", f.reason},           {"integrator", evolve_stats(res)}};
  if (fo.n_steady) p.results["n_steady"] = num(*fo.n_steady);
  p.checks = evolve_checks(res, cfg, o);
  p.checks.converged = p.checks.converged && !f.rejected;
  return p;
}

Point run_protocol_cmd(const Config& cfg, const Context&) {
  const BlockadeSpec s = blockade_spec(cfg);
  ProtocolConfig pc;
  pc.U = s.U;
  pc.kappa = s.kappa;
  pc.Lambda3Tilde = s.Lambda3Tilde;
  pc.r = s.r;
  pc.deltaLambda1 = s.deltaLambda1;
  pc.tau_block = cfg.get_optional("protocol", "tau_block");
  pc.target_p1 = cfg.get_optional("protocol", "target_p1");
  const std::string kind = cfg.get_string("noise", "kind", "none");
  pc.noise.kind = at_line(cfg, "noise", "kind", [&] { return noise_kind_from_string(kind); });
  pc.noise.sigma = cfg.get_double("noise", "sigma", 0.0);
  pc.truncation = truncation(cfg);
  at_line(cfg, "protocol", pc.tau_block ? "tau_block" : "target_p1", [&] {
    pc.validate();
    return 0;
  });
  const EvolveOptions o = evolve_options(cfg);
  const ProtocolResult r = run_protocol(pc, o);
  CsvTable t({"tau_block", "t_pi", "P1", "n_mean", "g2_bare", "g2_shifted", "g2_bound", "nbar_th", "diffusion",
              "squeezing", "leakage"});
  t.add_row({fmt(r.tau_block), fmt(r.t_pi), fmt(r.p1), fmt(r.moments.n), fmt(r.g2_bare), fmt(r.g2_shifted),
             fmt(r.g2_bound), fmt(r.nbar_th), fmt(r.diffusion), fmt(r.squeezing), fmt(r.leakage)});
  Point p;
  p.tables.emplace("main", std::move(t));
  p.results = {{"tau_block", num(r.tau_block)}, {"P1", num(r.p1)},          {"g2_bare", num(r.g2_bare)},
               {"g2_shifted", num(r.g2_shifted)}, {"g2_bound", num(r.g2_bound)}, {"warnings", r.warnings}};
  p.checks.trace_drift = std::abs(r.final_state.trace() - 1.0);
  p.checks.leakage = r.leakage;
  p.checks.converged = r.leakage <= o.leakage_budget;
  return p;
}

Point run_antiresonance(const Config& cfg, const Context& ctx) {
  const BlockadeSpec s = blockade_spec(cfg);
  const Truncation tr = truncation(cfg);
  const double lo = cfg.get_double("antiresonance", "min_offset", 1e-6);
  const double hi = cfg.get_double("antiresonance", "max_offset", 0.3);
  const int per_side = int(cfg.get_int("antiresonance", "per_side", 24));
  const std::vector<double> grid =
      at_line(cfg, "antiresonance", "min_offset", [&] { return antiresonance_grid(lo, hi, per_side); });
  AntiresonanceOptions ao;
  ao.workers = ctx.inner_workers;
  const AntiresonanceResult a = antiresonance_scan(s.Lambda3Tilde, s.U, s.kappa, grid, tr, ao);
  CsvTable t({"r", "n_ss"});
  for (std::size_t k = 0; k < a.r.size(); ++k) t.add_row({fmt(a.r[k]), fmt(a.n_ss[k])});
  CsvTable w({"floor", "plateau", "half_level", "left", "right", "fwhm", "P1_weak_drive"});
  const double p1 = s.kappa > 0 ? steady_p1_analytic(s.Lambda3Tilde, s.kappa) : kNaN;
  w.add_row({fmt(a.floor), fmt(a.plateau), fmt(a.half_level), fmt(a.left), fmt(a.right), fmt(a.fwhm), fmt(p1)});
  Point p;
  p.tables.emplace("main", std::move(t));
  p.tables.emplace("width", std::move(w));
  p.results = {{"floor", num(a.floor)}, {"plateau", num(a.plateau)}, {"fwhm", num(a.fwhm)},
               {"left", num(a.left)},   {"right", num(a.right)}};
  p.checks.converged = std::isfinite(a.fwhm) && a.fwhm > 0;
  return p;
}

Point run_channel(const Config& cfg, const Context& ctx) {
  const cplx alpha = cfg.get_complex("channel", "alpha", {0, 0});
  const double sigma = cfg.get_double("channel", "sigma", 0.0);
  const long samples = cfg.get_int("channel", "samples", 100000);
  const Truncation tr = truncation(cfg, "channel");
  const DensityMatrix sampled = at_line(cfg, "channel", "samples", [&] {
    return sample_displacement_channel(alpha, sigma, samples, ctx.opts.seed, tr);
  });
  const DensityMatrix exact = at_line(cfg, "channel", "sigma", [&] {
    return transform(displacement_operator(alpha, tr), thermal_state(sigma * sigma, tr));
  });
  const double dist = trace_distance(sampled, exact);
  CsvTable t({"samples", "seed", "trace_distance", "n_sampled", "n_exact"});
  t.add_row({std::to_string(samples), std::to_string(ctx.opts.seed), fmt(dist), fmt(moments(sampled).n),
             fmt(moments(exact).n)});
  Point p;
  p.tables.emplace("main", std::move(t));
  p.results = {{"trace_distance", num(dist)}, {"seed", ctx.opts.seed}};
  p.checks.trace_drift = std::abs(sampled.trace() - 1.0);
  return p;
}

const std::vector<CommandDef>& commands() {
  static const std::vector<CommandDef> defs = {
      {"tune", {"tune"}, run_tune},
      {"evolve", {"model", "time", "integrator", "sweep", "initial"}, run_evolve},
      {"steady", {"model", "sweep"}, run_steady},
      {"spectrum", {"model", "sweep", "spectrum"}, run_spectrum},
      {"semiclassical", {"model", "sweep", "semiclassical"}, run_semiclassical},
      {"escape", {"model", "time", "integrator", "sweep", "escape"}, run_escape},
      {"protocol", {"model", "integrator", "sweep", "noise", "protocol"}, run_protocol_cmd},
      {"antiresonance", {"model", "sweep", "antiresonance"}, run_antiresonance},
      {"channel", {"channel", "sweep"}, run_channel},
  };
  return defs;
}

const CommandDef& find_command(const std::string& name) {
  for (const auto& d : commands())
    if (d.name == name) return d;
  throw InvalidArgument("unknown command '" + name + "'");
}

// Resolves "section.key" or a bare key to a sweepable (section, key).
std::pair<std::string, std::string> resolve_sweep(const Config& cfg, const Sections& allowed) {
  const Entry& e = required(cfg, "sweep", "param");
  std::string section, key = e.value;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
    auto it = allowed.find(section);
    if (it == allowed.end() || !it->second.count(key) || section == "sweep")
      throw ConfigError("cannot sweep '" + e.value + "'", e.line);
    return {section, key};
  }
  for (const auto& [sec, keys] : allowed)
    if (sec != "sweep" && sec != "tune" && keys.count(key)) {
      if (!section.empty()) throw ConfigError("ambiguous sweep param '" + key + "', use section.key", e.line);
      section = sec;
    }
  if (section.empty()) throw ConfigError("cannot sweep '" + key + "'", e.line);
  return {section, key};
}

json params_json(const Config& cfg) {
  json params = json::object();
  for (const auto& [section, entries] : cfg.sections()) {
    json sec = json::object();
    for (const auto& e : entries) {
      if (sec.contains(e.key)) {
        if (!sec[e.key].is_array()) sec[e.key] = json::array({sec[e.key]});
        sec[e.key].push_back(e.value);
      } else {
        sec[e.key] = e.value;
      }
    }
    params[section.empty() ? "_" : section] = sec;
  }
  return params;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& d : commands()) n.push_back(d.name);
    return n;
  }();
  return names;
}

RunOutput run_command(const std::string& command, const std::string& config_text, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const CommandDef& def = find_command(command);
  const Config cfg = Config::parse(config_text);
  Sections allowed;
  for (const auto& s : def.sections) allowed[s] = all_keys().at(s);
  cfg.require_known(allowed, {"tune.row"});

  // sweep points (a single unnamed point when there is no sweep)
  std::vector<Config> configs;
  std::vector<std::string> values;
  std::string sweep_name;
  if (cfg.has_section("sweep")) {
    const auto [section, key] = resolve_sweep(cfg, allowed);
    sweep_name = section + "." + key;
    const Entry& v = required(cfg, "sweep", "values");
    for (double x : cfg.get_list("sweep", "values")) {
      Config c = cfg;
      values.push_back(format_double(x));
      c.set(section, key, values.back());
      configs.push_back(std::move(c));
    }
    if (configs.empty()) throw ConfigError("sweep values are empty", v.line);
  } else {
    configs.push_back(cfg);
  }

  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, configs.size()));
  const Context ctx{opts, configs.size() > 1 ? 1 : std::max<std::size_t>(1, opts.workers)};
  std::vector<std::optional<Point>> points(configs.size());
  std::vector<std::exception_ptr> failures(configs.size());
  std::mutex mu;
  std::size_t next = 0;
  auto work = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= configs.size()) return;
        k = next++;
      }
      try {
        points[k] = def.run(configs[k], ctx);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  RunOutput out;
  out.command = command;
  Checks checks;
  json results;
  std::map<std::string, CsvTable> tables;
  const bool swept = !sweep_name.empty();
  if (swept) results = {{"sweep_param", sweep_name}, {"points", json::array()}};
  for (std::size_t k = 0; k < points.size(); ++k) {
    Point& p = *points[k];
    checks.merge(p.checks);
    for (auto& [name, table] : p.tables) {
      if (!swept) {
        tables.emplace(name, table);
        continue;
      }
      auto it = tables.find(name);
      if (it == tables.end()) {
        std::vector<std::string> header = {"sweep_param", "sweep_value"};
        header.insert(header.end(), table.header().begin(), table.header().end());
        it = tables.emplace(name, CsvTable(header)).first;
      }
      it->second.append(table, {sweep_name, values[k]});
    }
    if (swept) {
      json r = p.results;
      r["sweep_value"] = std::stod(values[k]);
      r["checks"] = {{"trace_drift", num(p.checks.trace_drift)},
                     {"leakage", num(p.checks.leakage)},
                     {"converged", p.checks.converged}};
      results["points"].push_back(r);
    } else {
      results = p.results;
    }
  }
  for (const auto& [name, table] : tables)
    out.files[name == "main" ? command + ".csv" : command + "_" + name + ".csv"] = table.str();

  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.checks_ok = checks.converged;
  out.summary = {{"command", command},
                 {"config_hash", git_blob_hash(config_text)},
                 {"params", params_json(cfg)},
                 {"results", results},
                 {"checks",
                  {{"trace_drift", num(checks.trace_drift)},
                   {"leakage", num(checks.leakage)},
                   {"converged", checks.converged}}},
                 {"runtime_s", runtime}};
  return out;
}

std::string summary_text(const RunOutput& out) { return out.summary.dump(2) + "\n"; }

json error_json(const std::string& command, const std::exception& e) {
  json err = {{"message", e.what()}, {"code", "internal_error"}};
  if (const auto* fe = dynamic_cast<const Error*>(&e)) err["code"] = fe->code();
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) err["line"] = ce->line();
  return {{"command", command}, {"error", err}};
}

}  // namespace fockblock::cli
