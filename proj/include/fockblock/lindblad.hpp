#pragma once

#include <vector>

#include "fockblock/fock.hpp"

namespace fockblock {

struct JumpOperator {
  Operator op;
  double rate;
};

// d rho/dt = -i[H, rho] + sum_j rate_j D[L_j] rho
class LindbladGenerator {
 public:
  LindbladGenerator(const Operator& H, std::vector<JumpOperator> jumps);
  // H with a single loss channel kappa D[a].
  static LindbladGenerator cavity(const Operator& H, double kappa);

  Index dim() const noexcept { return H_.rows(); }
  const SparseMatrix& hamiltonian() const noexcept { return H_; }
  const std::vector<SparseMatrix>& jumps() const noexcept { return L_; }
  const std::vector<double>& rates() const noexcept { return rates_; }
  // -iH - 1/2 sum rate L^dag L
  const SparseMatrix& effective() const noexcept { return K_; }
  double total_rate() const;

  // General action, valid for any square matrix.
  void apply(const DenseMatrix& rho, DenseMatrix& out) const;
  DenseMatrix apply(const DenseMatrix& rho) const;
  // Cheaper action that assumes rho is Hermitian.
  void apply_hermitian(const DenseMatrix& rho, DenseMatrix& out, DenseMatrix& scratch) const;

  // Upper bound on the spectral radius of the superoperator.
  double spectral_bound() const;

 private:
  SparseMatrix H_;
  SparseMatrix K_;
  std::vector<SparseMatrix> L_;
  std::vector<SparseMatrix> Ldag_;
  std::vector<double> rates_;
};

// Column-stacking superoperator: vec(A X B) = (B^T kron A) vec(X).
SparseMatrix liouvillian_matrix(const LindbladGenerator& gen);

Vector vectorize(const DenseMatrix& m);
DenseMatrix unvectorize(const Vector& v, Index dim);

}  // namespace fockblock
