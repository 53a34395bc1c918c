#include "fockblock/fock.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fockblock/error.hpp"

namespace fockblock {

namespace {

SparseMatrix from_triplets(Index dim, const std::vector<Eigen::Triplet<cplx>>& trips) {
  SparseMatrix m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

// exp(-i A) for Hermitian A.
DenseMatrix unitary_exp(const DenseMatrix& herm) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("eigensolver failed in unitary_exp");
  Vector phases(herm.rows());
  for (Index k = 0; k < herm.rows(); ++k) phases(k) = std::exp(cplx(0, -es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Truncation::Truncation(Index dim) : dim_(dim) {
  if (dim < 2) throw InvalidArgument("truncation dim must be >= 2, got " + std::to_string(dim));
}

Operator::Operator(DenseMatrix m) : dim_(m.rows()), layout_(Layout::kDense), dense_(std::move(m)) {
  if (dense_.rows() != dense_.cols()) throw DimensionMismatch("operator must be square");
  if (!dense_.allFinite()) throw InvalidArgument("operator has non-finite entries");
}

Operator::Operator(SparseMatrix m)
    : dim_(m.rows()), layout_(Layout::kSparse), sparse_(std::move(m)) {
  if (sparse_.rows() != sparse_.cols()) throw DimensionMismatch("operator must be square");
  sparse_.makeCompressed();
  for (Index k = 0; k < sparse_.nonZeros(); ++k) {
    if (!std::isfinite(sparse_.valuePtr()[k].real()) || !std::isfinite(sparse_.valuePtr()[k].imag()))
      throw InvalidArgument("operator has non-finite entries");
  }
}

DenseMatrix Operator::dense() const {
  if (layout_ == Layout::kDense) return dense_;
  return DenseMatrix(sparse_);
}

SparseMatrix Operator::sparse() const {
  if (layout_ == Layout::kSparse) return sparse_;
  SparseMatrix s = dense_.sparseView();
  s.makeCompressed();
  return s;
}

Operator Operator::adjoint() const {
  if (layout_ == Layout::kDense) return Operator(DenseMatrix(dense_.adjoint()));
  return Operator(SparseMatrix(sparse_.adjoint()));
}

double Operator::hermiticity_error() const {
  if (layout_ == Layout::kDense) return (dense_ - dense_.adjoint()).cwiseAbs().maxCoeff();
  SparseMatrix d = sparse_ - SparseMatrix(sparse_.adjoint());
  double worst = 0;
  for (Index k = 0; k < d.nonZeros(); ++k) worst = std::max(worst, std::abs(d.valuePtr()[k]));
  return worst;
}

KetState::KetState(Vector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 2) throw InvalidArgument("ket needs at least 2 levels");
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > 1e-12)
    throw InvariantViolation("ket norm deviates from 1 by " + std::to_string(norm - 1.0));
}

KetState KetState::normalized(Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0)) throw InvalidArgument("cannot normalize a zero vector");
  return KetState(amplitudes / norm);
}

KetState KetState::fock(Index n, Truncation t) {
  if (n < 0 || n >= t.dim()) throw InvalidArgument("Fock index outside truncation");
  Vector v = Vector::Zero(t.dim());
  v(n) = 1;
  return KetState(std::move(v));
}

InvariantReport check_density(const DenseMatrix& rho) {
  InvariantReport r{};
  r.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  r.trace_error = std::abs(rho.trace() - cplx(1, 0));
  DenseMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

DensityMatrix::DensityMatrix(DenseMatrix rho, const DensityTolerances& tol) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw DimensionMismatch("density matrix must be square");
  if (rho_.rows() < 2) throw InvalidArgument("density matrix needs at least 2 levels");
  if (!rho_.allFinite()) throw InvariantViolation("density matrix has non-finite entries");
  const InvariantReport r = check_density(rho_);
  if (r.hermiticity_error > tol.hermiticity)
    throw InvariantViolation("density matrix not Hermitian: " + std::to_string(r.hermiticity_error));
  if (r.trace_error > tol.trace)
    throw InvariantViolation("density matrix trace error " + std::to_string(r.trace_error));
  if (r.min_eigenvalue < tol.positivity)
    throw InvariantViolation("density matrix eigenvalue " + std::to_string(r.min_eigenvalue));
}

DensityMatrix DensityMatrix::pure(const KetState& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::fock(Index n, Truncation t) { return pure(KetState::fock(n, t)); }

double DensityMatrix::trace() const { return rho_.trace().real(); }

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

double DensityMatrix::min_eigenvalue() const { return check_density(rho_).min_eigenvalue; }

cplx DensityMatrix::expectation(const Operator& op) const {
  if (op.dim() != dim()) throw DimensionMismatch("operator and state dims differ");
  if (op.layout() == Layout::kSparse) return (op.sparse() * rho_).trace();
  return (op.dense() * rho_).trace();
}

Operator annihilation(Truncation t) {
  std::vector<Eigen::Triplet<cplx>> trips;
  for (Index n = 1; n < t.dim(); ++n) trips.emplace_back(n - 1, n, std::sqrt(double(n)));
  return Operator(from_triplets(t.dim(), trips));
}

Operator creation(Truncation t) { return annihilation(t).adjoint(); }

Operator number_operator(Truncation t) {
  std::vector<Eigen::Triplet<cplx>> trips;
  for (Index n = 1; n < t.dim(); ++n) trips.emplace_back(n, n, double(n));
  return Operator(from_triplets(t.dim(), trips));
}

Operator parity_operator(Truncation t) {
  std::vector<Eigen::Triplet<cplx>> trips;
  for (Index n = 0; n < t.dim(); ++n) trips.emplace_back(n, n, n % 2 == 0 ? 1.0 : -1.0);
  return Operator(from_triplets(t.dim(), trips));
}

Operator identity_operator(Truncation t) {
  SparseMatrix id(t.dim(), t.dim());
  id.setIdentity();
  return Operator(std::move(id));
}

bool coherent_fits(cplx alpha, Truncation t) {
  const double r = std::abs(alpha);
  return r * r + 6 * r + 10 <= double(t.dim());
}

void require_coherent_fits(cplx alpha, Truncation t, const char* what) {
  if (!coherent_fits(alpha, t)) {
    const double r = std::abs(alpha);
    throw TruncationInadequate(std::string(what) + ": |alpha|=" + std::to_string(r) +
                               " needs dim >= " + std::to_string(int(std::ceil(r * r + 6 * r + 10))) +
                               ", have " + std::to_string(t.dim()));
  }
}

KetState coherent_state(cplx alpha, Truncation t) {
  require_coherent_fits(alpha, t, "coherent_state");
  Vector c(t.dim());
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (Index n = 1; n < t.dim(); ++n) c(n) = c(n - 1) * alpha / std::sqrt(double(n));
  const double norm2 = c.squaredNorm();
  if (std::abs(1.0 - norm2) >= 1e-10)
    throw TruncationInadequate("coherent_state tail mass " + std::to_string(1.0 - norm2));
  return KetState(c / std::sqrt(norm2));
}

Operator displacement_operator(cplx alpha, Truncation t) {
  require_coherent_fits(alpha, t, "displacement_operator");
  const DenseMatrix a = annihilation(t).dense();
  // exp(alpha a^dag - conj(alpha) a) = exp(-i A), A = i(alpha a^dag - conj(alpha) a)
  const DenseMatrix herm = cplx(0, 1) * (alpha * a.adjoint() - std::conj(alpha) * a);
  return Operator(unitary_exp(herm));
}

DensityMatrix thermal_state(double nbar, Truncation t) {
  if (!(nbar >= 0)) throw InvalidArgument("thermal occupation must be >= 0");
  const double dim = double(t.dim());
  const double q = nbar / (1.0 + nbar);
  // Beyond nbar*20 <= dim, also require the dropped tail to move <n> by < 1e-9.
  if (nbar * 20 > dim || dim * std::pow(q, dim) > 1e-9)
    throw TruncationInadequate("thermal_state nbar=" + std::to_string(nbar) + " does not fit dim " +
                               std::to_string(t.dim()));
  DenseMatrix rho = DenseMatrix::Zero(t.dim(), t.dim());
  double w = 1, total = 0;
  for (Index n = 0; n < t.dim(); ++n, w *= q) {
    rho(n, n) = w;
    total += w;
  }
  return DensityMatrix(rho / total);
}

Operator squeeze_operator(double xi, Truncation t) {
  if (xi != 0) {
    // squeezed vacuum weight beyond level 2m falls like tanh|xi|^(2m); ask for 1e-12
    const double th = std::tanh(std::abs(xi));
    const double need = 10 + std::ceil(12 * std::log(10.0) / -std::log(th)) + 2 * std::sinh(std::abs(xi)) * std::sinh(std::abs(xi));
    if (double(t.dim()) < need)
      throw TruncationInadequate("squeeze_operator xi=" + std::to_string(xi) + " needs dim >= " +
                                 std::to_string(int(need)));
  }
  const DenseMatrix a = annihilation(t).dense();
  const DenseMatrix a2 = a * a;
  // exp(G), G = xi/2 (a^2 - a^dag^2) anti-Hermitian; A = iG
  const DenseMatrix herm = cplx(0, 0.5 * xi) * (a2 - a2.adjoint());
  return Operator(unitary_exp(herm));
}

DensityMatrix transform(const Operator& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) throw DimensionMismatch("transform dims differ");
  const DenseMatrix ud = u.dense();
  DenseMatrix out = ud * rho.matrix() * ud.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out));
}

Moments moments(const DenseMatrix& rho) {
  Moments m;
  for (Index k = 0; k < rho.rows(); ++k) {
    const double p = rho(k, k).real();
    m.n += k * p;
    m.n2 += double(k) * double(k - 1) * p;
    if (k >= 1) m.a += std::sqrt(double(k)) * rho(k, k - 1);
    if (k >= 2) m.aa += std::sqrt(double(k) * double(k - 1)) * rho(k, k - 2);
  }
  return m;
}

double g2_from_moments(const Moments& m, double floor) {
  if (!(m.n > floor))
    throw UndefinedG2("<n> = " + std::to_string(m.n) + " is at or below the g2 floor");
  return m.n2 / (m.n * m.n);
}

double g2_instantaneous(const DensityMatrix& rho, double floor) {
  return g2_from_moments(moments(rho), floor);
}

QuadratureVariances quadrature_variances(const DensityMatrix& rho) {
  const Moments m = moments(rho);
  QuadratureVariances v{};
  v.x = m.n + 0.5 + m.aa.real() - 2 * m.a.real() * m.a.real();
  v.y = m.n + 0.5 - m.aa.real() - 2 * m.a.imag() * m.a.imag();
  return v;
}

double wigner_point(const DensityMatrix& rho, cplx beta) {
  const Truncation t(rho.dim());
  const DenseMatrix d = displacement_operator(beta, t).dense();
  const DenseMatrix shifted = d.adjoint() * rho.matrix() * d;
  double parity = 0;
  for (Index n = 0; n < rho.dim(); ++n) parity += (n % 2 == 0 ? 1.0 : -1.0) * shifted(n, n).real();
  return 2.0 / std::numbers::pi * parity;
}

double trace_distance(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionMismatch("trace_distance dims differ");
  DenseMatrix diff = a - b;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(std::size_t(a.nonZeros() * b.nonZeros()));
  for (Index ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (Index kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          trips.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                             ia.value() * ib.value());
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

}  // namespace fockblock
