#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fockblock/model.hpp"

namespace fockblock {

// Mean-field equation of motion d(alpha)/dt for the target model. The
// argument is the mean-field amplitude, not the frame displacement.
cplx eom_rhs(cplx mean_field_alpha, const BlockadeSpec& s);

// Jacobian of (Re f, Im f) with respect to (Re alpha, Im alpha).
Eigen::Matrix2d eom_jacobian(cplx mean_field_alpha, const BlockadeSpec& s);

struct FixedPoint {
  cplx alpha{0, 0};
  std::array<cplx, 2> jacobian_eigs{};
  bool stable = false;
  double residual = 0;
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
};

struct SeedFailure {
  cplx seed{0, 0};
  std::string reason;
};

struct FixedPointSearch {
  std::vector<FixedPoint> points;
  std::vector<SeedFailure> failures;
};

struct FixedPointOptions {
  int random_seeds = 8;
  std::uint64_t rng_seed = 0x5eed;
  int max_iterations = 200;
  double merge_distance = 1e-8;
};

// Damped Newton on (Re alpha, Im alpha) from the seeds 0, -3 L/(2U) and
// random points in the disk |alpha| <= 2|alpha_ha|.
FixedPointSearch find_fixed_points(const BlockadeSpec& s, const FixedPointOptions& opts = {});

// -3L/(2U) - i kappa/(2 conj L) + 2 U r/(9 conj L); equals the usual
// expression for real L and rotates with the phase of L otherwise.
cplx alpha_ha_perturbative(const BlockadeSpec& s);

// -kappa/2 -/+ i 3 sqrt3 |L|^2/(2U) (1 - 8 U^2 r/(27 |L|^2)); first entry has +i.
std::array<cplx, 2> stability_eigenvalues_analytic(const BlockadeSpec& s);

// U <= |L|, where the large-amplitude expansions are meaningful.
bool perturbative_regime(const BlockadeSpec& s);

}  // namespace fockblock
