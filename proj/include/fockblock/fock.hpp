#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fockblock {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Vector = Eigen::VectorXcd;

// Number of Fock levels kept, |0> .. |dim-1>.
class Truncation {
 public:
  explicit Truncation(Index dim);
  Index dim() const noexcept { return dim_; }
  bool operator==(const Truncation&) const = default;

 private:
  Index dim_;
};

enum class Layout { kDense, kSparse };

// Square matrix on a truncated space. Stores one representation and
// converts on request.
class Operator {
 public:
  explicit Operator(DenseMatrix m);
  explicit Operator(SparseMatrix m);

  Index dim() const noexcept { return dim_; }
  Truncation truncation() const { return Truncation(dim_); }
  Layout layout() const noexcept { return layout_; }

  DenseMatrix dense() const;
  SparseMatrix sparse() const;

  Operator adjoint() const;
  // max |H - H^dagger| entry
  double hermiticity_error() const;

 private:
  Index dim_;
  Layout layout_;
  DenseMatrix dense_;
  SparseMatrix sparse_;
};

class KetState {
 public:
  // Throws InvariantViolation unless the norm is 1 within 1e-12.
  explicit KetState(Vector amplitudes);
  static KetState normalized(Vector amplitudes);
  static KetState fock(Index n, Truncation t);

  Index dim() const noexcept { return amps_.size(); }
  const Vector& amplitudes() const noexcept { return amps_; }
  cplx operator[](Index n) const { return amps_(n); }

 private:
  Vector amps_;
};

struct DensityTolerances {
  double hermiticity = 1e-12;
  double trace = 1e-10;
  double positivity = -1e-8;
};

class DensityMatrix {
 public:
  // Validates Hermiticity, trace and smallest eigenvalue.
  explicit DensityMatrix(DenseMatrix rho, const DensityTolerances& tol = {});
  static DensityMatrix pure(const KetState& psi);
  static DensityMatrix fock(Index n, Truncation t);

  Index dim() const noexcept { return rho_.rows(); }
  const DenseMatrix& matrix() const noexcept { return rho_; }

  double population(Index n) const { return rho_(n, n).real(); }
  double trace() const;
  double purity() const;
  double min_eigenvalue() const;
  cplx expectation(const Operator& op) const;

 private:
  DenseMatrix rho_;
};

struct InvariantReport {
  double hermiticity_error;
  double trace_error;
  double min_eigenvalue;
};
InvariantReport check_density(const DenseMatrix& rho);

Operator annihilation(Truncation t);
Operator creation(Truncation t);
Operator number_operator(Truncation t);
Operator parity_operator(Truncation t);
Operator identity_operator(Truncation t);

// |alpha|^2 + 6|alpha| + 10 <= dim
bool coherent_fits(cplx alpha, Truncation t);
void require_coherent_fits(cplx alpha, Truncation t, const char* what);

KetState coherent_state(cplx alpha, Truncation t);
// exp(alpha a^dagger - conj(alpha) a) at the working truncation.
Operator displacement_operator(cplx alpha, Truncation t);
DensityMatrix thermal_state(double nbar, Truncation t);
// exp((xi a^2 - xi a^dagger^2)/2); xi > 0 squeezes X.
Operator squeeze_operator(double xi, Truncation t);

// U rho U^dagger, with the result validated.
DensityMatrix transform(const Operator& u, const DensityMatrix& rho);

struct Moments {
  double n = 0;     // <a^dagger a>
  double n2 = 0;    // <a^dagger a^dagger a a>
  cplx a{0, 0};     // <a>
  cplx aa{0, 0};    // <a a>
};
Moments moments(const DenseMatrix& rho);
inline Moments moments(const DensityMatrix& rho) { return moments(rho.matrix()); }

inline constexpr double kG2Floor = 1e-8;

double g2_from_moments(const Moments& m, double floor = kG2Floor);
double g2_instantaneous(const DensityMatrix& rho, double floor = kG2Floor);

// X = (a + a^dagger)/sqrt2, Y = (a - a^dagger)/(i sqrt2)
struct QuadratureVariances {
  double x;
  double y;
};
QuadratureVariances quadrature_variances(const DensityMatrix& rho);

double wigner_point(const DensityMatrix& rho, cplx beta);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_distance(const DenseMatrix& a, const DenseMatrix& b);

// Sparse Kronecker product, first factor is the slow index.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

}  // namespace fockblock
