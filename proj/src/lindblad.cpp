#include "fockblock/lindblad.hpp"

#include <cmath>

#include "fockblock/error.hpp"

namespace fockblock {

namespace {

double row_sum_bound(const SparseMatrix& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

LindbladGenerator::LindbladGenerator(const Operator& H, std::vector<JumpOperator> jumps)
    : H_(H.sparse()) {
  const double herm = H.hermiticity_error();
  if (herm > 1e-12 * std::max(1.0, row_sum_bound(H_)))
    throw InvalidArgument("Hamiltonian is not Hermitian (error " + std::to_string(herm) + ")");
  K_ = cplx(0, -1) * H_;
  for (auto& j : jumps) {
    if (j.op.dim() != H.dim()) throw DimensionMismatch("jump operator dim differs from Hamiltonian");
    if (!(j.rate >= 0)) throw InvalidArgument("jump rate must be >= 0");
    if (j.rate == 0) continue;
    SparseMatrix L = j.op.sparse();
    SparseMatrix Ld = L.adjoint();
    K_ -= cplx(0.5 * j.rate, 0) * SparseMatrix(Ld * L);
    L_.push_back(std::move(L));
    Ldag_.push_back(std::move(Ld));
    rates_.push_back(j.rate);
  }
  K_.makeCompressed();
}

LindbladGenerator LindbladGenerator::cavity(const Operator& H, double kappa) {
  if (!(kappa >= 0)) throw InvalidArgument("kappa must be >= 0");
  std::vector<JumpOperator> jumps;
  if (kappa > 0) jumps.push_back({annihilation(H.truncation()), kappa});
  return LindbladGenerator(H, std::move(jumps));
}

double LindbladGenerator::total_rate() const {
  double s = 0;
  for (double r : rates_) s += r;
  return s;
}

void LindbladGenerator::apply(const DenseMatrix& rho, DenseMatrix& out) const {
  out.noalias() = K_ * rho;
  out.noalias() += (K_ * rho.adjoint()).adjoint();
  for (std::size_t j = 0; j < L_.size(); ++j) {
    DenseMatrix lr = L_[j] * rho;
    out.noalias() += rates_[j] * (L_[j] * lr.adjoint()).adjoint();
  }
}

DenseMatrix LindbladGenerator::apply(const DenseMatrix& rho) const {
  DenseMatrix out(rho.rows(), rho.cols());
  apply(rho, out);
  return out;
}

void LindbladGenerator::apply_hermitian(const DenseMatrix& rho, DenseMatrix& out,
                                        DenseMatrix& scratch) const {
  // K rho + rho K^dag = K rho + (K rho)^dag when rho is Hermitian
  // The shortcut maps anti-Hermitian parts with the wrong sign, where they
  // grow, so every term is made exactly Hermitian entrywise.
  scratch.noalias() = K_ * rho;
  out = scratch + scratch.adjoint();
  for (std::size_t j = 0; j < L_.size(); ++j) {
    // L rho L^dag = L (L rho)^dag
    DenseMatrix lr = L_[j] * rho;
    scratch.noalias() = L_[j] * lr.adjoint();
    out += (0.5 * rates_[j]) * (scratch + scratch.adjoint());
  }
}

double LindbladGenerator::spectral_bound() const {
  double b = 2 * row_sum_bound(K_);
  for (std::size_t j = 0; j < L_.size(); ++j) {
    const double l = row_sum_bound(L_[j]);
    b += rates_[j] * l * l;
  }
  return b;
}

SparseMatrix liouvillian_matrix(const LindbladGenerator& gen) {
  const Index d = gen.dim();
  SparseMatrix id(d, d);
  id.setIdentity();
  const SparseMatrix& K = gen.effective();
  // K rho -> I kron K ; rho K^dag -> conj(K) kron I
  SparseMatrix L = kron(id, K) + kron(SparseMatrix(K.conjugate()), id);
  for (std::size_t j = 0; j < gen.jumps().size(); ++j) {
    const SparseMatrix& J = gen.jumps()[j];
    L += cplx(gen.rates()[j], 0) * kron(SparseMatrix(J.conjugate()), J);
  }
  L.prune(cplx(0, 0));
  L.makeCompressed();
  return L;
}

Vector vectorize(const DenseMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

DenseMatrix unvectorize(const Vector& v, Index dim) {
  if (v.size() != dim * dim) throw DimensionMismatch("unvectorize size mismatch");
  return Eigen::Map<const DenseMatrix>(v.data(), dim, dim);
}

}  // namespace fockblock
