#include "fockblock/model.hpp"

#include <cmath>

#include "fockblock/error.hpp"

namespace fockblock {

namespace {

// Assembles U a^dag a^dag a a + Delta a^dag a + (l1 a^dag + l2 a^dag^2 + l3 a^dag^2 a + h.c.)
SparseMatrix assemble(double U, double Delta, cplx l1, cplx l2, cplx l3, const SparseMatrix& a) {
  const SparseMatrix ad = a.adjoint();
  const SparseMatrix n = ad * a;
  const SparseMatrix ad2 = ad * ad;
  SparseMatrix h = U * SparseMatrix(ad2 * a * a) + cplx(Delta, 0) * n;
  SparseMatrix drive = l1 * ad + l2 * ad2 + l3 * SparseMatrix(ad2 * a);
  h += drive;
  h += SparseMatrix(drive.adjoint());
  h.prune(cplx(0, 0));
  h.makeCompressed();
  return h;
}

}  // namespace

TunedDrives tune_drives(cplx L3, double U, double kappa, double r) {
  if (!(U > 0)) throw InvalidArgument("tune_drives requires U > 0");
  const double m2 = std::norm(L3);
  TunedDrives d;
  d.alpha_b = L3 / (2 * U);
  d.Lambda1_b = L3 * cplx(-r + m2 / (2 * U * U), kappa / (4 * U));
  d.Lambda2_b = -L3 * L3 / (4 * U);
  d.Delta_b = -m2 / U;
  return d;
}

RwaParams rwa_params(const TunedDrives& d, double U, double kappa) {
  return RwaParams{U, d.Delta_b, d.Lambda1_b, d.Lambda2_b, kappa};
}

DisplacedParams displace_params(const RwaParams& p, cplx alpha) {
  const double m2 = std::norm(alpha);
  DisplacedParams d;
  d.U = p.U;
  d.kappa = p.kappa;
  d.frame_alpha = alpha;
  d.DeltaTilde = p.Delta + 4 * p.U * m2;
  d.Lambda1Tilde = p.Lambda1 + alpha * p.Delta + 2.0 * std::conj(alpha) * p.Lambda2 +
                   2 * p.U * m2 * alpha - cplx(0, 0.5 * p.kappa) * alpha;
  d.Lambda2Tilde = p.Lambda2 + p.U * alpha * alpha;
  d.Lambda3Tilde = 2 * p.U * alpha;
  return d;
}

double displacement_energy_offset(const RwaParams& p, cplx alpha) {
  const double m2 = std::norm(alpha);
  return p.U * m2 * m2 + p.Delta * m2 + 2 * (p.Lambda1 * std::conj(alpha)).real() +
         2 * (p.Lambda2 * std::conj(alpha) * std::conj(alpha)).real();
}

Operator build_rwa_hamiltonian(const RwaParams& p, Truncation t) {
  return Operator(assemble(p.U, p.Delta, p.Lambda1, p.Lambda2, 0, annihilation(t).sparse()));
}

Operator build_target_hamiltonian(const BlockadeSpec& s, Truncation t) {
  return Operator(assemble(s.U, s.DeltaMismatch, s.linear_drive(), s.Lambda2Mismatch,
                           s.Lambda3Tilde, annihilation(t).sparse()));
}

Operator build_displaced_hamiltonian(const DisplacedParams& p, Truncation t) {
  return Operator(assemble(p.U, p.DeltaTilde, p.Lambda1Tilde, p.Lambda2Tilde, p.Lambda3Tilde,
                           annihilation(t).sparse()));
}

Operator collective_mode(Truncation per_mode) {
  const SparseMatrix a = annihilation(per_mode).sparse();
  SparseMatrix id(per_mode.dim(), per_mode.dim());
  id.setIdentity();
  SparseMatrix b = (kron(a, id) + kron(id, a)) * cplx(1 / std::sqrt(2.0), 0);
  return Operator(std::move(b));
}

Operator antisymmetric_mode(Truncation per_mode) {
  const SparseMatrix a = annihilation(per_mode).sparse();
  SparseMatrix id(per_mode.dim(), per_mode.dim());
  id.setIdentity();
  SparseMatrix b = (kron(a, id) - kron(id, a)) * cplx(1 / std::sqrt(2.0), 0);
  return Operator(std::move(b));
}

Operator build_two_mode_hamiltonian(const BlockadeSpec& s, Truncation per_mode) {
  if (per_mode.dim() < 3) throw InvalidArgument("two-mode model needs per-mode dim >= 3");
  const SparseMatrix b = collective_mode(per_mode).sparse();
  return Operator(assemble(0, s.DeltaMismatch, s.linear_drive(), s.Lambda2Mismatch, s.Lambda3Tilde, b));
}

}  // namespace fockblock
