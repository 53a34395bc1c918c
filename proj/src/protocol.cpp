#include "fockblock/protocol.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fockblock/error.hpp"

namespace fockblock {

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kAdditive: return "additive";
    case NoiseKind::kMultiplicative: return "multiplicative";
    case NoiseKind::kPhase: return "phase";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::kNone;
  if (s == "additive") return NoiseKind::kAdditive;
  if (s == "multiplicative") return NoiseKind::kMultiplicative;
  if (s == "phase") return NoiseKind::kPhase;
  throw InvalidArgument("unknown noise kind '" + s + "'");
}

double NoiseModel::diffusion(cplx alpha_b) const {
  return kind == NoiseKind::kPhase ? std::norm(alpha_b) * sigma * sigma : 0.0;
}

double NoiseModel::thermal_occupation(cplx alpha_b) const {
  switch (kind) {
    case NoiseKind::kNone: return 0;
    case NoiseKind::kAdditive: return sigma * sigma;
    case NoiseKind::kMultiplicative: return std::norm(alpha_b) * sigma * sigma;
    case NoiseKind::kPhase: return 0.5 * (std::sqrt(1 + 2 * diffusion(alpha_b)) - 1);
  }
  return 0;
}

double NoiseModel::squeezing(cplx alpha_b) const {
  return kind == NoiseKind::kPhase ? 0.25 * std::log1p(2 * diffusion(alpha_b)) : 0.0;
}

double ProtocolConfig::t_pi() const { return std::numbers::pi / (2 * std::abs(Lambda3Tilde)); }

cplx ProtocolConfig::alpha_b() const { return Lambda3Tilde / (2 * U); }

BlockadeSpec ProtocolConfig::spec() const {
  BlockadeSpec s;
  s.Lambda3Tilde = Lambda3Tilde;
  s.r = r;
  s.U = U;
  s.kappa = kappa;
  s.deltaLambda1 = deltaLambda1;
  return s;
}

void ProtocolConfig::validate() const {
  if (!(U > 0)) throw InvalidArgument("protocol needs U > 0");
  if (!(kappa >= 0)) throw InvalidArgument("protocol needs kappa >= 0");
  if (Lambda3Tilde == cplx(0, 0)) throw InvalidArgument("protocol needs a nonzero Lambda3Tilde");
  if (tau_block.has_value() == target_p1.has_value())
    throw InvalidArgument("set exactly one of tau_block and target_p1");
  if (tau_block && !(*tau_block > 0)) throw InvalidArgument("tau_block must be positive");
  if (target_p1 && !(*target_p1 > 0 && *target_p1 <= 0.5)) throw InvalidArgument("target_p1 must lie in (0, 0.5]");
  if (!(noise.sigma >= 0)) throw InvalidArgument("noise sigma must be >= 0");
}

DensityMatrix initial_state(const ProtocolConfig& cfg) {
  const cplx ab = cfg.alpha_b();
  const Truncation t = cfg.truncation;
  switch (cfg.noise.kind) {
    case NoiseKind::kNone: return DensityMatrix::fock(0, t);
    case NoiseKind::kAdditive:
    case NoiseKind::kMultiplicative: return thermal_state(cfg.noise.thermal_occupation(ab), t);
    case NoiseKind::kPhase: {
      const DensityMatrix th = thermal_state(cfg.noise.thermal_occupation(ab), t);
      return transform(squeeze_operator(cfg.noise.squeezing(ab), t), th);
    }
  }
  throw InvalidArgument("unknown noise kind");
}

double g2_shifted_additive(const Moments& m, double nbar) {
  Moments c = m;
  c.n = m.n + nbar;
  c.n2 = m.n2 + 4 * m.n * nbar + 2 * nbar * nbar;
  return g2_from_moments(c);
}

double g2_shifted_phase(const Moments& m, double D) {
  // c = a + i y/sqrt2 with real Gaussian y, E[y^2] = D; odd moments of y drop out
  Moments c = m;
  c.n = m.n + 0.5 * D;
  c.n2 = m.n2 + 2 * D * m.n + 0.75 * D * D - D * m.aa.real();
  return g2_from_moments(c);
}

double g2_bound_additive(const Moments& m, double nbar) {
  if (!(nbar >= 0)) throw InvalidArgument("nbar_th must be >= 0");
  return g2_from_moments(m) + 4 * nbar / m.n;
}

double g2_bound_phase(const Moments& m, double D) {
  if (!(D >= 0)) throw InvalidArgument("diffusion must be >= 0");
  return g2_from_moments(m) + 2 * D / m.n;
}

bool bound_assumptions_hold(const Moments& m, bool with_aa) {
  if (std::norm(m.a) > 0.01 * m.n) return false;
  if (with_aa && std::abs(m.aa) > 0.01 * m.n) return false;
  return true;
}

namespace {

EvolveResult evolve_span(const LindbladGenerator& gen, const DensityMatrix& rho, double t0, double t1,
                         const EvolveOptions& opts) {
  return evolve(gen, rho, TimeGrid(t0, t1, t1 - t0), opts);
}

}  // namespace

double optimize_tau_block(const ProtocolConfig& cfg, double target, const EvolveOptions& opts) {
  if (!(target > 0 && target <= 1)) throw InvalidArgument("target P1 must lie in (0, 1]");
  const BlockadeSpec s = cfg.spec();
  const auto gen = LindbladGenerator::cavity(build_target_hamiltonian(s, cfg.truncation), cfg.kappa);
  const DensityMatrix rho0 = initial_state(cfg);
  const double tpi = cfg.t_pi();
  const int coarse = 64;

  const EvolveResult scan = evolve(gen, rho0, TimeGrid(0, tpi, tpi / coarse), opts);
  std::size_t hit = 0;
  double best = 0;
  for (std::size_t k = 0; k < scan.series.size(); ++k) {
    best = std::max(best, scan.series.P1[k]);
    if (scan.series.P1[k] >= target) {
      hit = k;
      break;
    }
  }
  if (hit == 0) {
    if (scan.series.P1[0] >= target) return 0;
    throw Unreachable("target P1 " + std::to_string(target) + " not reached before t_pi; best " + std::to_string(best),
                      best);
  }
  double a = scan.series.times[hit - 1], b = scan.series.times[hit];
  DensityMatrix rho_a = a > 0 ? DensityMatrix(evolve_span(gen, rho0, 0, a, opts).final_state) : rho0;
  double t_best = b, err_best = std::abs(scan.series.P1[hit] - target);
  for (int it = 0; it < 100 && err_best > 1e-6 && b - a > 1e-13 * b; ++it) {
    const double mid = 0.5 * (a + b);
    EvolveResult step = evolve_span(gen, rho_a, a, mid, opts);
    const double p = step.series.P1.back();
    if (std::abs(p - target) < err_best) {
      err_best = std::abs(p - target);
      t_best = mid;
    }
    if (p < target) {
      a = mid;
      rho_a = DensityMatrix(std::move(step.final_state));
    } else {
      b = mid;
    }
  }
  if (err_best > 1e-4) throw ConvergenceFailure("tau_block bisection stalled at |P1 - target| = " + std::to_string(err_best));
  return t_best;
}

ProtocolResult run_protocol(const ProtocolConfig& cfg, const EvolveOptions& opts) {
  cfg.validate();
  const cplx ab = cfg.alpha_b();
  const BlockadeSpec s = cfg.spec();
  const auto gen = LindbladGenerator::cavity(build_target_hamiltonian(s, cfg.truncation), cfg.kappa);
  const double tau = cfg.tau_block ? *cfg.tau_block : optimize_tau_block(cfg, *cfg.target_p1, opts);
  const DensityMatrix rho0 = initial_state(cfg);
  EvolveResult ev = evolve(gen, rho0, TimeGrid(0, tau, tau / 16), opts);

  ProtocolResult res(DensityMatrix(std::move(ev.final_state)));
  res.tau_block = tau;
  res.t_pi = cfg.t_pi();
  res.moments = moments(res.final_state);
  res.p1 = res.final_state.population(1);
  res.leakage = ev.checks.max_leakage;
  res.nbar_th = cfg.noise.thermal_occupation(ab);
  res.squeezing = cfg.noise.squeezing(ab);
  res.diffusion = cfg.noise.diffusion(ab);
  res.g2_bare = g2_from_moments(res.moments);
  switch (cfg.noise.kind) {
    case NoiseKind::kNone:
      res.g2_shifted = res.g2_bound = res.g2_bare;
      break;
    case NoiseKind::kAdditive:
    case NoiseKind::kMultiplicative:
      res.g2_shifted = g2_shifted_additive(res.moments, res.nbar_th);
      res.g2_bound = g2_bound_additive(res.moments, res.nbar_th);
      if (!bound_assumptions_hold(res.moments, false))
        res.warnings.push_back("|<a>|^2 exceeds 1% of <n>; the additive bound assumes <a> = 0");
      break;
    case NoiseKind::kPhase:
      res.g2_shifted = g2_shifted_phase(res.moments, res.diffusion);
      res.g2_bound = g2_bound_phase(res.moments, res.diffusion);
      if (!bound_assumptions_hold(res.moments, true))
        res.warnings.push_back("<a> or <aa> is not small; the phase bound assumes both vanish");
      break;
  }
  return res;
}

DensityMatrix sample_displacement_channel(cplx alpha, double sigma, long samples, std::uint64_t seed, Truncation t) {
  if (samples < 1) throw InvalidArgument("need at least one sample");
  if (!(sigma >= 0)) throw InvalidArgument("sigma must be >= 0");
  require_coherent_fits(std::abs(alpha) + 6 * sigma, t, "sample_displacement_channel");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sigma / std::sqrt(2.0));
  const Index d = t.dim();
  const long batch = 1024;
  DenseMatrix acc = DenseMatrix::Zero(d, d);
  DenseMatrix block(d, batch);
  long done = 0;
  while (done < samples) {
    const long m = std::min(batch, samples - done);
    for (long j = 0; j < m; ++j) {
      const double re = nd(rng);
      const double im = nd(rng);
      const cplx beta = alpha + cplx(re, im);
      cplx c = std::exp(-0.5 * std::norm(beta));
      double norm2 = 0;
      for (Index n = 0; n < d; ++n) {
        if (n > 0) c *= beta / std::sqrt(double(n));
        block(n, j) = c;
        norm2 += std::norm(c);
      }
      block.col(j) /= std::sqrt(norm2);
    }
    acc.noalias() += block.leftCols(m) * block.leftCols(m).adjoint();
    done += m;
  }
  acc /= double(samples);
  acc = 0.5 * (acc + acc.adjoint()).eval();
  return DensityMatrix(std::move(acc));
}

}  // namespace fockblock
