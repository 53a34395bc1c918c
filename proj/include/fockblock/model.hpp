#pragma once

#include "fockblock/fock.hpp"

namespace fockblock {

// Lab-frame drive parameters in the rotating frame.
struct RwaParams {
  double U = 0;       // Kerr strength
  double Delta = 0;   // detuning
  cplx Lambda1{0, 0}; // one-photon drive
  cplx Lambda2{0, 0}; // two-photon drive
  double kappa = 0;   // loss rate
};

// Coefficients after shifting a -> a + frame_alpha. Lambda3Tilde = 2 U frame_alpha.
struct DisplacedParams {
  double U = 0;
  double DeltaTilde = 0;
  cplx Lambda1Tilde{0, 0};
  cplx Lambda2Tilde{0, 0};
  cplx Lambda3Tilde{0, 0};
  double kappa = 0;
  cplx frame_alpha{0, 0};
};

// Target blockade model: Lambda3Tilde a^dag (a^dag a - r) + h.c. + U a^dag a^dag a a,
// with the linear drive scaled by (1 + deltaLambda1). The two mismatch fields
// below default to zero.
struct BlockadeSpec {
  cplx Lambda3Tilde{0, 0};
  double r = 1;
  double U = 0;
  double kappa = 0;
  cplx deltaLambda1{0, 0};
  cplx Lambda2Mismatch{0, 0};  // adds Lambda2Mismatch a^dag a^dag + h.c.
  double DeltaMismatch = 0;    // adds DeltaMismatch a^dag a

  // Lambda3Tilde * deltaLambda1
  cplx delta_Lambda1_abs() const { return Lambda3Tilde * deltaLambda1; }
  // Linear drive coefficient -Lambda3Tilde r (1 + deltaLambda1).
  cplx linear_drive() const { return -Lambda3Tilde * r * (1.0 + deltaLambda1); }
};

struct TunedDrives {
  cplx alpha_b{0, 0};
  cplx Lambda1_b{0, 0};
  cplx Lambda2_b{0, 0};
  double Delta_b = 0;
};

TunedDrives tune_drives(cplx Lambda3Tilde, double U, double kappa, double r);
RwaParams rwa_params(const TunedDrives& drives, double U, double kappa);

DisplacedParams displace_params(const RwaParams& p, cplx alpha);
// c-number dropped when the RWA Hamiltonian is conjugated by D(alpha).
double displacement_energy_offset(const RwaParams& p, cplx alpha);

Operator build_rwa_hamiltonian(const RwaParams& p, Truncation t);
Operator build_target_hamiltonian(const BlockadeSpec& s, Truncation t);
Operator build_displaced_hamiltonian(const DisplacedParams& p, Truncation t);

// Collective mode b = (a1 + a2)/sqrt2 on the product space, mode 1 slow index.
Operator collective_mode(Truncation per_mode);
Operator antisymmetric_mode(Truncation per_mode);
// Lambda3Tilde b^dag (b^dag b - r(1 + deltaLambda1)) + h.c.; no Kerr term.
Operator build_two_mode_hamiltonian(const BlockadeSpec& s, Truncation per_mode);

}  // namespace fockblock
