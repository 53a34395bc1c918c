// Acceptance checks. Each criterion prints one PASS/FAIL line; run one
// with --criterion N or all of them with no arguments.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fockblock/dynamics.hpp"
#include "fockblock/error.hpp"
#include "fockblock/lindblad.hpp"
#include "fockblock/model.hpp"
#include "fockblock/protocol.hpp"
#include "fockblock/semiclassical.hpp"
#include "fockblock/spectral.hpp"

using namespace fockblock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... A>
std::string fmtn(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

BlockadeSpec spec(cplx L, double U, double kappa, double dl = 0, double r = 1) {
  BlockadeSpec s;
  s.Lambda3Tilde = L;
  s.U = U;
  s.kappa = kappa;
  s.deltaLambda1 = dl;
  s.r = r;
  return s;
}

LindbladGenerator target(const BlockadeSpec& s, Index dim) {
  return LindbladGenerator::cavity(build_target_hamiltonian(s, Truncation(dim)), s.kappa);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

// least squares y = a + b x; returns {slope, intercept, R^2}
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  const double b = sxy / sxx;
  return {b, my - b * mx, syy > 0 ? sxy * sxy / (sxx * syy) : 1.0};
}

// 1. tune_drives -> displace_params closes
Outcome tuning_closure() {
  constexpr double kTol = 1e-10;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> l3(0.1, 3.0), u(0.02, 0.6);
  std::uniform_int_distribution<int> rr(1, 3);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const double L = l3(rng), U = u(rng), r = rr(rng);
    const TunedDrives d = tune_drives(L, U, 1.0, r);
    const DisplacedParams q = displace_params(rwa_params(d, U, 1.0), d.alpha_b);
    for (double e : {std::abs(q.DeltaTilde), std::abs(q.Lambda2Tilde), std::abs(q.Lambda1Tilde + L * r),
                     std::abs(q.Lambda3Tilde - L)})
      worst = std::max(worst, e / L);
  }
  return {worst < kTol, fmt("worst relative residual %.3g (tol 1e-10)", worst)};
}

// 2. exact blockade at U = 0.4, Lambda3 = 2
Outcome exact_blockade() {
  constexpr double kPopTol = 1e-8, kG2Tol = 1e-6;
  const EvolveResult r =
      evolve(target(spec(2, 0.4, 1), 130), DensityMatrix::fock(0, Truncation(130)), TimeGrid(0, 20, 0.05));
  double pmax = 0, gmax = 0;
  for (std::size_t k = 0; k < r.series.size(); ++k) {
    pmax = std::max(pmax, r.series.P_ge2[k]);
    if (!std::isnan(r.series.g2[k])) gmax = std::max(gmax, r.series.g2[k]);
  }
  return {pmax < kPopTol && gmax < kG2Tol && r.checks.ok(1e-6),
          fmtn("max P(n>=2) %.3g (tol 1e-8), max g2 %.3g (tol 1e-6), %s %ld steps", pmax, gmax,
               to_string(r.checks.stats.method).c_str(), r.checks.stats.steps)};
}

// 3. short-time g2 plateau equals |dl|^2
Outcome g2_plateau() {
  constexpr double kRel = 0.25;
  const double L = 2;
  bool pass = true;
  std::string detail;
  for (double dl : {0.02, 0.05, 0.1}) {
    const EvolveResult r =
        evolve(target(spec(L, 0.4, 1, dl), 130), DensityMatrix::fock(0, Truncation(130)), TimeGrid(0, 0.8 / L, 0.005));
    std::vector<double> window;
    for (std::size_t k = 0; k < r.series.size(); ++k) {
      const double t = r.series.times[k];
      if (t >= 0.2 / L - 1e-12 && t <= 0.8 / L + 1e-12 && !std::isnan(r.series.g2[k])) window.push_back(r.series.g2[k]);
    }
    const double ratio = mean(window) / (dl * dl);
    pass = pass && std::abs(ratio - 1) <= kRel && r.checks.ok(1e-6);
    detail += fmtn("dl=%.2f <g2>/dl^2=%.3f; ", dl, ratio);
  }
  return {pass, detail + "tol 25%"};
}

// 4. weak-drive steady state against the closed form
Outcome weak_drive_steady() {
  constexpr double kP1Tol = 1e-3, kLeakTol = 1e-9;
  bool pass = true;
  std::string detail;
  for (double L : {0.25, 0.5, 1.0}) {
    const BlockadeSpec s = spec(L, 0.4, 1);
    const LindbladGenerator gen = target(s, 30);
    const DensityMatrix rho = steady_state(gen);
    const double p1 = steady_p1_analytic(L, 1);
    const double pge2 = std::max(0.0, 1 - rho.population(0) - rho.population(1));
    const EvolveResult ev = evolve(gen, DensityMatrix::fock(0, Truncation(30)), TimeGrid(0, 15, 15));
    const double dyn = ev.series.P1.back();
    pass = pass && std::abs(rho.population(1) - p1) < kP1Tol && pge2 < kLeakTol && std::abs(dyn - p1) < kP1Tol;
    detail += fmtn("L=%.2f |dP1| ss %.2g evolve %.2g P>=2 %.2g; ", L, std::abs(rho.population(1) - p1),
                   std::abs(dyn - p1), pge2);
  }
  return {pass, detail};
}

// 5. escape constant from the long-time relaxation
Outcome escape_constant() {
  constexpr double kLo = 0.15, kHi = 0.40, kScaling = 0.15;
  const double L = 2, U = 0.4, kappa = 1;
  std::vector<double> cs, gammas;
  std::string detail;
  bool pass = true;
  for (double dl : {0.02, 0.05}) {
    const BlockadeSpec s = spec(L, U, kappa, dl);
    const LindbladGenerator gen = target(s, 130);
    const double estimate = 0.25 * std::norm(s.delta_Lambda1_abs()) / kappa;
    const double t1 = std::min(200 / estimate, 500.0);
    const EvolveResult ev = evolve(gen, DensityMatrix::fock(0, Truncation(130)), TimeGrid(0, t1, 0.5));
    EscapeFitOptions o;
    o.n_steady = moments(steady_state(gen)).n;
    const EscapeFit f = fit_escape_rate(ev.series, s.delta_Lambda1_abs(), kappa, o);
    pass = pass && !f.rejected && f.c >= kLo && f.c <= kHi && ev.checks.ok(1e-6);
    cs.push_back(f.c);
    gammas.push_back(f.gamma_esc);
    detail += fmtn("dl=%.2f c=%.4f Gamma=%.4g window [%.0f, %.0f]; ", dl, f.c, f.gamma_esc, f.window_start,
                   f.window_end);
  }
  const double scaling = (gammas[1] / gammas[0]) / std::pow(0.05 / 0.02, 2);
  pass = pass && std::abs(scaling - 1) <= kScaling;
  return {pass, detail + fmt("Gamma ratio / 6.25 = %.3f (tol 15%%)", scaling)};
}

// 6. golden-rule constant at strong drive
Outcome fgr_constant() {
  constexpr double kRel = 0.20;
  const double L = 100;
  bool pass = true;
  std::string detail;
  for (auto [ratio, expected] : {std::pair{0.2, 0.0051}, std::pair{0.3, 0.0036}}) {
    const FgrRate f = fgr_escape_rate(spec(L, ratio * L, 1, 0.01), Truncation(140));
    const double rel = f.c / expected - 1;
    pass = pass && std::abs(rel) <= kRel && f.regime_ok;
    detail += fmtn("U/L=%.1f c=%.5f (expected %.4f, %+.0f%%); ", ratio, f.c, expected, 100 * rel);
  }
  return {pass, detail + "tol 20%"};
}

// 7. dissipative gap against the slow-rate formula
Outcome slow_rate() {
  constexpr double kFactor = 3, kSlopeTol = 0.25;
  const double L = 10, kappa = 1;
  std::vector<double> n, logs;
  bool within = true;
  std::string detail;
  for (double ratio : {0.5, 0.45, 0.4}) {
    const BlockadeSpec s = spec(L, ratio * L, kappa);
    const GapResult g = dissipative_gap(target(s, 60));
    const double pert = gamma_slow_perturbative(s);
    const double q = std::max(g.gap / pert, pert / g.gap);
    within = within && q <= kFactor;
    n.push_back(std::norm(alpha_ha_perturbative(s)));
    logs.push_back(std::log(g.gap));
    detail += fmtn("U/L=%.2f gap=%.4g formula=%.4g; ", ratio, g.gap, pert);
  }
  const double slope = linear_fit(n, logs)[0];
  const bool slope_ok = std::abs(slope + 1) <= kSlopeTol;
  return {within && slope_ok,
          detail + fmtn("factor-3 %s, slope %.3f %s", within ? "ok" : "missed", slope, slope_ok ? "ok" : "missed")};
}

// 8. antiresonance width trend and floor
Outcome antiresonance() {
  constexpr double kR2 = 0.9, kFloorTol = 1e-2;
  const double L = 10, kappa = 1;
  std::vector<double> x, y;
  bool floor_ok = true;
  std::string detail;
  AntiresonanceOptions o;
  o.workers = 1;
  for (double ratio : {0.6, 0.5, 0.4}) {
    const AntiresonanceResult a =
        antiresonance_scan(L, ratio * L, kappa, antiresonance_grid(1e-7, 0.3, 24), Truncation(60), o);
    x.push_back(1 / (ratio * ratio));
    y.push_back(std::log(a.fwhm));
    floor_ok = floor_ok && std::abs(a.floor - steady_p1_analytic(L, kappa)) < kFloorTol;
    detail += fmtn("U/L=%.1f fwhm=%.4g floor=%.4f; ", ratio, a.fwhm, a.floor);
  }
  const auto [slope, icpt, r2] = linear_fit(x, y);
  (void)icpt;
  return {slope < 0 && r2 > kR2 && floor_ok, detail + fmtn("slope %.3f R^2 %.4f", slope, r2)};
}

// 9. semiclassical fixed point and stability
Outcome semiclassics() {
  constexpr double kAlphaTol = 1e-2, kReTol = 1e-6, kImRel = 0.02;
  const BlockadeSpec s = spec(2, 0.4, 1);
  const FixedPointSearch f = find_fixed_points(s);
  const cplx want(-7.4556, -0.25);
  const FixedPoint* hi = nullptr;
  for (const auto& p : f.points)
    if (!hi || std::abs(p.alpha - want) < std::abs(hi->alpha - want)) hi = &p;
  if (!hi) return {false, "no fixed point found"};
  const double dist = std::abs(hi->alpha - want);
  double re_err = 0;
  for (cplx e : hi->jacobian_eigs) re_err = std::max(re_err, std::abs(e.real() + s.kappa / 2));
  const double im_num = std::abs(hi->jacobian_eigs[0].imag());
  const double im_rel = std::abs(std::abs(stability_eigenvalues_analytic(s)[0].imag()) - im_num) / im_num;
  return {dist < kAlphaTol && re_err < kReTol && im_rel < kImRel,
          fmtn("alpha %.5f%+.5fi, |alpha - target| %.4f (tol 1e-2), Re err %.2g, Im rel %.4f", hi->alpha.real(),
               hi->alpha.imag(), dist, re_err, im_rel)};
}

// 10. end-to-end protocol constraints
Outcome protocol() {
  constexpr double kBare = 1e-5, kAdd = 0.04, kPhase = 0.02;
  auto cfg = [](double U, double dl, Index dim) {
    ProtocolConfig c;
    c.U = U;
    c.kappa = 1;
    c.Lambda3Tilde = 2;
    c.deltaLambda1 = dl;
    c.target_p1 = 0.5;
    c.truncation = Truncation(dim);
    return c;
  };
  bool pass = true;
  std::string detail;
  double worst = 0;
  for (double U : {0.4, 0.2, 0.1}) worst = std::max(worst, run_protocol(cfg(U, 0, 40)).g2_bare);
  pass = pass && worst < kBare;
  detail += fmt("(a) max g2 %.3g; ", worst);

  const ProtocolResult b = run_protocol(cfg(0.4, 0.05, 130));
  const bool b_ok = b.g2_bare >= 0.0025 / 2 && b.g2_bare <= 0.0025 * 2;
  pass = pass && b_ok;
  detail += fmt("(b) g2 %.4g; ", b.g2_bare);

  ProtocolConfig c = cfg(0.4, 0, 40);
  c.noise = NoiseModel::additive(std::sqrt(0.005));
  const ProtocolResult rc = run_protocol(c);
  pass = pass && rc.g2_bound >= kAdd;
  detail += fmtn("(c) bound %.4f at <n> %.4f; ", rc.g2_bound, rc.moments.n);

  ProtocolConfig d = cfg(0.4, 0, 40);
  d.noise = NoiseModel::phase(std::sqrt(0.005) / std::abs(d.alpha_b()));
  const ProtocolResult rd = run_protocol(d);
  pass = pass && rd.g2_bound >= kPhase;
  detail += fmtn("(d) bound %.4f at <n> %.4f", rd.g2_bound, rd.moments.n);
  return {pass, detail};
}

// 11. sampled displacements reproduce the thermal channel
Outcome channel() {
  constexpr double kTol = 0.01;
  const Truncation t(50);
  const cplx alpha(1.5, 0.5);
  const double sigma = 0.3;
  const DensityMatrix sampled = sample_displacement_channel(alpha, sigma, 100000, 12345, t);
  const DensityMatrix exact = transform(displacement_operator(alpha, t), thermal_state(sigma * sigma, t));
  const double d = trace_distance(sampled, exact);
  return {d < kTol, fmt("trace distance %.4g (tol 0.01)", d)};
}

// 12. two-mode blockade confines to one excitation
Outcome two_mode() {
  constexpr double kLeak = 1e-8, kOverlap = 1e-8;
  const Truncation per(6);
  const Index d = per.dim();
  const BlockadeSpec s = spec(1.0, 0.0, 1.0);
  const Operator H = build_two_mode_hamiltonian(s, per);
  const SparseMatrix a = annihilation(per).sparse();
  SparseMatrix id(d, d);
  id.setIdentity();
  const std::vector<JumpOperator> jumps = {{Operator(kron(a, id)), s.kappa}, {Operator(kron(id, a)), s.kappa}};
  const DensityMatrix vac = DensityMatrix::fock(0, Truncation(d * d));
  auto excitations = [d](Index k) { return k / d + k % d; };

  EvolveOptions o;
  o.abort_on_leakage = false;
  double beyond = 0;
  const LindbladGenerator lossy(H, jumps);
  propagate(lossy, vac.matrix(), TimeGrid(0, 10, 0.05).times(), o.integrator,
            [&](std::size_t, double, const DenseMatrix& rho) {
              double p = 0;
              for (Index k = 0; k < d * d; ++k)
                if (excitations(k) > 1) p += rho(k, k).real();
              beyond = std::max(beyond, p);
            });

  const LindbladGenerator closed(H, {});
  const double tpi = std::numbers::pi / (2 * std::abs(s.Lambda3Tilde));
  DenseMatrix final_rho;
  propagate(closed, vac.matrix(), std::vector<double>{0, tpi}, o.integrator,
            [&](std::size_t k, double, const DenseMatrix& rho) {
              if (k == 1) final_rho = rho;
            });
  // single-excitation block, normalized, against (|10> + |01>)/sqrt2
  Vector sym = Vector::Zero(d * d);
  sym(1 * d + 0) = sym(0 * d + 1) = 1 / std::sqrt(2.0);
  double p1 = 0;
  for (Index k = 0; k < d * d; ++k)
    if (excitations(k) == 1) p1 += final_rho(k, k).real();
  const double overlap = (sym.adjoint() * final_rho * sym)(0, 0).real() / p1;
  return {beyond < kLeak && overlap > 1 - kOverlap,
          fmtn("population beyond one excitation %.3g (tol 1e-8), Bell overlap 1 - %.3g", beyond, 1 - overlap)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"tuning closure", tuning_closure},
      {"exact blockade", exact_blockade},
      {"short-time g2 plateau", g2_plateau},
      {"weak-drive steady state", weak_drive_steady},
      {"escape-rate constant", escape_constant},
      {"golden-rule constant", fgr_constant},
      {"slow-rate formula", slow_rate},
      {"antiresonance width", antiresonance},
      {"semiclassics", semiclassics},
      {"protocol end to end", protocol},
      {"noise-channel sampling", channel},
      {"two-mode blockade", two_mode},
  };
  return list;
}

bool run_one(int n) {
  const auto& c = criteria().at(std::size_t(n - 1));
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("criterion %d: %s %s | %s | %.1fs\n", n, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--criterion") == 0 && k + 1 < argc) {
      which.push_back(std::atoi(argv[++k]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 64;
    }
  }
  if (which.empty())
    for (int n = 1; n <= int(criteria().size()); ++n) which.push_back(n);
  bool ok = true;
  for (int n : which) {
    if (n < 1 || n > int(criteria().size())) {
      std::fprintf(stderr, "no criterion %d\n", n);
      return 64;
    }
    ok = run_one(n) && ok;
  }
  return ok ? 0 : 1;
}
