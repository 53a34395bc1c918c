#include "fockblock/semiclassical.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "fockblock/error.hpp"

namespace fockblock {

namespace {

constexpr cplx I{0, 1};

// Wirtinger derivatives df/dalpha and df/dconj(alpha).
void wirtinger(cplx a, const BlockadeSpec& s, cplx& da, cplx& dac) {
  const cplx L = s.Lambda3Tilde;
  da = -4.0 * I * s.U * std::conj(a) * a - 2.0 * I * L * std::conj(a) - 2.0 * I * std::conj(L) * a -
       0.5 * s.kappa - I * s.DeltaMismatch;
  dac = -2.0 * I * s.U * a * a - 2.0 * I * L * a - 2.0 * I * s.Lambda2Mismatch;
}

}  // namespace

cplx eom_rhs(cplx a, const BlockadeSpec& s) {
  const cplx L = s.Lambda3Tilde;
  const cplx ac = std::conj(a);
  return -2.0 * I * s.U * ac * a * a - 2.0 * I * L * ac * a - I * std::conj(L) * a * a -
         I * s.linear_drive() - 0.5 * s.kappa * a - I * s.DeltaMismatch * a -
         2.0 * I * s.Lambda2Mismatch * ac;
}

Eigen::Matrix2d eom_jacobian(cplx a, const BlockadeSpec& s) {
  cplx A, B;
  wirtinger(a, s, A, B);
  const cplx p = A + B, m = A - B;
  Eigen::Matrix2d J;
  J << p.real(), -m.imag(), p.imag(), m.real();
  return J;
}

bool perturbative_regime(const BlockadeSpec& s) { return s.U <= std::abs(s.Lambda3Tilde); }

cplx alpha_ha_perturbative(const BlockadeSpec& s) {
  if (!(s.U > 0)) throw InvalidArgument("alpha_ha_perturbative requires U > 0");
  if (s.Lambda3Tilde == cplx(0, 0)) throw InvalidArgument("alpha_ha_perturbative requires a nonzero drive");
  const cplx Lc = std::conj(s.Lambda3Tilde);
  return -3.0 * s.Lambda3Tilde / (2 * s.U) - I * s.kappa / (2.0 * Lc) + 2 * s.U * s.r / (9.0 * Lc);
}

std::array<cplx, 2> stability_eigenvalues_analytic(const BlockadeSpec& s) {
  if (!(s.U > 0)) throw InvalidArgument("stability_eigenvalues_analytic requires U > 0");
  const double m2 = std::norm(s.Lambda3Tilde);
  const double w = 3 * std::sqrt(3.0) * m2 / (2 * s.U) * (1 - 8 * s.U * s.U * s.r / (27 * m2));
  return {cplx(-0.5 * s.kappa, w), cplx(-0.5 * s.kappa, -w)};
}

FixedPointSearch find_fixed_points(const BlockadeSpec& s, const FixedPointOptions& o) {
  const double scale = std::max(std::abs(s.Lambda3Tilde), s.kappa);
  const double res_tol = 1e-10 * std::max(scale, 1e-300);

  std::vector<cplx> seeds{0};
  double radius = 1;
  if (s.U > 0 && s.Lambda3Tilde != cplx(0, 0)) {
    seeds.push_back(-3.0 * s.Lambda3Tilde / (2 * s.U));
    radius = 2 * std::abs(alpha_ha_perturbative(s));
  }
  std::mt19937_64 rng(o.rng_seed);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int k = 0; k < o.random_seeds; ++k) {
    const double rad = radius * std::sqrt(unit(rng));
    const double phi = 2 * std::numbers::pi * unit(rng);
    seeds.push_back(std::polar(rad, phi));
  }

  FixedPointSearch out;
  for (cplx seed : seeds) {
    cplx a = seed;
    cplx f = eom_rhs(a, s);
    bool done = std::abs(f) == 0;
    std::string why;
    for (int it = 0; it < o.max_iterations && !done; ++it) {
      const Eigen::Matrix2d J = eom_jacobian(a, s);
      const Eigen::Vector2d F(f.real(), f.imag());
      Eigen::FullPivLU<Eigen::Matrix2d> lu(J);
      if (!lu.isInvertible()) {
        why = "singular Jacobian";
        break;
      }
      const Eigen::Vector2d dx = lu.solve(F);
      const cplx step(dx(0), dx(1));
      double lam = 1;
      cplx trial = a - step;
      cplx ft = eom_rhs(trial, s);
      for (int h = 0; h < 40 && std::abs(ft) > std::abs(f); ++h) {
        lam *= 0.5;
        trial = a - lam * step;
        ft = eom_rhs(trial, s);
      }
      a = trial;
      f = ft;
      if (std::abs(lam * step) < 1e-13 * std::max(1.0, std::abs(a))) done = true;
    }
    if (!done) {
      out.failures.push_back({seed, why.empty() ? "no convergence" : why});
      continue;
    }
    if (!(std::abs(f) < res_tol)) {
      out.failures.push_back({seed, "stalled with residual " + std::to_string(std::abs(f))});
      continue;
    }
    bool dup = false;
    for (const auto& p : out.points)
      if (std::abs(p.alpha - a) < o.merge_distance * std::max(1.0, std::abs(a))) dup = true;
    if (dup) continue;
    FixedPoint fp;
    fp.alpha = a;
    fp.residual = std::abs(f);
    fp.jacobian = eom_jacobian(a, s);
    Eigen::EigenSolver<Eigen::Matrix2d> es(fp.jacobian);
    fp.jacobian_eigs = {es.eigenvalues()(0), es.eigenvalues()(1)};
    if (fp.jacobian_eigs[0].imag() < fp.jacobian_eigs[1].imag()) std::swap(fp.jacobian_eigs[0], fp.jacobian_eigs[1]);
    fp.stable = fp.jacobian_eigs[0].real() < 0 && fp.jacobian_eigs[1].real() < 0;
    out.points.push_back(fp);
  }
  return out;
}

}  // namespace fockblock
