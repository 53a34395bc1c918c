#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fockblock/dynamics.hpp"
#include "fockblock/error.hpp"
#include "fockblock/model.hpp"
#include "fockblock/protocol.hpp"

using namespace fockblock;

namespace {

// Golub-Welsch nodes and weights for weight exp(-x^2).
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    w[k] = std::sqrt(std::numbers::pi) * std::pow(es.eigenvectors()(0, k), 2);
  }
}

DenseMatrix displaced(const DenseMatrix& rho, cplx beta, Truncation t) {
  const DenseMatrix d = displacement_operator(beta, t).dense();
  return d * rho * d.adjoint();
}

DensityMatrix test_state(Truncation t) {
  Vector v = Vector::Zero(t.dim());
  v(0) = 0.7;
  v(1) = cplx(0.6, 0.2);
  v(2) = cplx(0.05, -0.08);
  return DensityMatrix::pure(KetState::normalized(v));
}

ProtocolConfig base(double U, double dl) {
  ProtocolConfig c;
  c.U = U;
  c.kappa = 1;
  c.Lambda3Tilde = 2;
  c.deltaLambda1 = dl;
  c.target_p1 = 0.5;
  c.truncation = Truncation(40);
  return c;
}

}  // namespace

TEST_CASE("noise kinds") {
  CHECK(noise_kind_from_string(to_string(NoiseKind::kPhase)) == NoiseKind::kPhase);
  CHECK_THROWS_AS(noise_kind_from_string("pink"), InvalidArgument);

  ProtocolConfig c = base(0.4, 0);
  const DensityMatrix vac = initial_state(c);
  CHECK(vac.population(0) == 1.0);

  c.noise = NoiseModel::additive(0.1);
  CHECK(std::abs(moments(initial_state(c)).n - 0.01) < 1e-12);

  // |alpha_b|^2 sigma^2 = 0.125 with alpha_b = 2.5
  c.noise = NoiseModel::phase(std::sqrt(0.125) / 2.5);
  CHECK(std::abs(c.noise.diffusion(c.alpha_b()) - 0.125) < 1e-15);
  CHECK(std::abs(c.noise.thermal_occupation(c.alpha_b()) - 0.059017) < 1e-6);
  CHECK(std::abs(c.noise.squeezing(c.alpha_b()) - 0.055786) < 1e-6);
  const QuadratureVariances v = quadrature_variances(initial_state(c));
  CHECK(std::abs(v.y - 0.625) < 1e-6);
  CHECK(std::abs(v.x - 0.5) < 1e-6);
}

TEST_CASE("bounds reference values") {
  Moments one;
  one.n = 1;
  CHECK(std::abs(g2_bound_additive(one, 0.01) - 0.04) < 1e-15);
  Moments half;
  half.n = 0.5;
  CHECK(std::abs(g2_bound_additive(half, 0.005) - 0.04) < 1e-15);
  CHECK(std::abs(g2_bound_phase(half, 0.01) - 0.04) < 1e-15);
  Moments m;
  m.n = 0.5;
  m.n2 = 0.01;
  CHECK(g2_bound_additive(m, 0) == g2_from_moments(m));
  CHECK(g2_bound_phase(m, 0) == g2_from_moments(m));
  CHECK(g2_shifted_phase(m, 0) == g2_from_moments(m));
  // bound noise term scales with |alpha_b|^2 at fixed sigma
  const double s = 0.01;
  const double d1 = NoiseModel::phase(s).diffusion(ProtocolConfig(base(0.2, 0)).alpha_b());
  const double d2 = NoiseModel::phase(s).diffusion(ProtocolConfig(base(0.1, 0)).alpha_b());
  CHECK(std::abs(d2 / d1 - 4.0) < 1e-12);
}

TEST_CASE("additive shift matches a quadrature average of displacements") {
  const Truncation t(40);
  const DensityMatrix rho = test_state(t);
  const double nbar = 0.05;
  std::vector<double> x, w;
  gauss_hermite(24, x, w);
  DenseMatrix avg = DenseMatrix::Zero(40, 40);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      avg += w[i] * w[j] / std::numbers::pi * displaced(rho.matrix(), std::sqrt(nbar) * cplx(x[i], x[j]), t);
  const Moments exact = moments(avg);
  const Moments m = moments(rho);
  CHECK(std::abs(exact.n - (m.n + nbar)) < 1e-10);
  CHECK(std::abs(g2_shifted_additive(m, nbar) - g2_from_moments(exact)) < 1e-9);
}

TEST_CASE("phase shift matches a quadrature average of displacements") {
  const Truncation t(40);
  const DensityMatrix rho = test_state(t);
  const double D = 0.08;
  std::vector<double> x, w;
  gauss_hermite(30, x, w);
  DenseMatrix avg = DenseMatrix::Zero(40, 40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = std::sqrt(2 * D) * x[i];  // E[y^2] = D
    avg += w[i] / std::sqrt(std::numbers::pi) * displaced(rho.matrix(), cplx(0, y / std::sqrt(2.0)), t);
  }
  const Moments exact = moments(avg);
  const Moments m = moments(rho);
  CHECK(std::abs(exact.n - (m.n + D / 2)) < 1e-10);
  CHECK(std::abs(g2_shifted_phase(m, D) - g2_from_moments(exact)) < 1e-9);
}

TEST_CASE("config validation") {
  ProtocolConfig c = base(0.4, 0);
  c.tau_block = 0.3;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.target_p1.reset();
  CHECK_NOTHROW(c.validate());
  c.tau_block = -1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  ProtocolConfig d = base(0.0, 0);
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d = base(0.4, 0);
  d.target_p1 = 0.7;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}

TEST_CASE("tau_block optimization") {
  ProtocolConfig lossless = base(0.4, 0);
  lossless.kappa = 0;
  lossless.truncation = Truncation(12);
  const double tau = optimize_tau_block(lossless, 0.5);
  CHECK(std::abs(tau - std::numbers::pi / 8) < 1e-5);

  ProtocolConfig c = base(0.4, 0);
  try {
    optimize_tau_block(c, 1.0);
    FAIL("expected Unreachable");
  } catch (const Unreachable& e) {
    CHECK(e.best() > 0.5);
    CHECK(e.best() < 1.0);
  }

  const ProtocolResult r = run_protocol(c);
  CHECK(r.tau_block < r.t_pi);
  CHECK(std::abs(r.p1 - 0.5) < 1e-4);
}

TEST_CASE("protocol outcomes") {
  const ProtocolResult ideal = run_protocol(base(0.4, 0));
  CHECK(ideal.g2_bare < 1e-6);
  CHECK(ideal.g2_bound == ideal.g2_bare);

  // escaped population climbs toward |alpha_ha|^2 ~ 56 before t_pi, so g2
  // at tau sits above the short-time |dl|^2 plateau
  ProtocolConfig mc = base(0.4, 0.05);
  mc.truncation = Truncation(130);
  const ProtocolResult mism = run_protocol(mc);
  CHECK(mism.g2_bare > 0.0025);
  BlockadeSpec s;
  s.Lambda3Tilde = 2;
  s.U = 0.4;
  s.kappa = 1;
  s.deltaLambda1 = 0.05;
  const EvolveResult direct = evolve(LindbladGenerator::cavity(build_target_hamiltonian(s, Truncation(130)), 1.0),
                                     DensityMatrix::fock(0, Truncation(130)), TimeGrid(0, mism.tau_block, mism.tau_block));
  CHECK(mism.g2_bare == doctest::Approx(direct.series.g2.back()).epsilon(1e-5));

  ProtocolConfig noisy = base(0.4, 0);
  noisy.noise = NoiseModel::additive(std::sqrt(0.005));
  const ProtocolResult add = run_protocol(noisy);
  CHECK(add.g2_bound - add.g2_bare >= 4 * 0.005 / add.moments.n - 1e-12);
  CHECK(add.nbar_th == doctest::Approx(0.005));
}

TEST_CASE("sampled displacement channel") {
  const Truncation t(30);
  const DensityMatrix a = sample_displacement_channel(cplx(1, 0.5), 0.2, 5000, 7, t);
  const DensityMatrix b = sample_displacement_channel(cplx(1, 0.5), 0.2, 5000, 7, t);
  CHECK((a.matrix() - b.matrix()).norm() == 0.0);
  const DensityMatrix c = sample_displacement_channel(cplx(1, 0.5), 0.2, 5000, 8, t);
  CHECK((a.matrix() - c.matrix()).norm() > 0.0);
  const DensityMatrix exact = transform(displacement_operator(cplx(1, 0.5), t), thermal_state(0.04, t));
  CHECK(trace_distance(a, exact) < 0.05);
  const DensityMatrix zero = sample_displacement_channel(0.0, 0.0, 3, 1, t);
  CHECK(std::abs(zero.population(0) - 1.0) < 1e-14);
}
