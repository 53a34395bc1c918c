#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "fockblock/error.hpp"
#include "fockblock/spectral.hpp"

namespace fockblock {

namespace {

using Lu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// Liouvillian with row 0 replaced by the trace functional.
SparseMatrix bordered(const SparseMatrix& L, Index d) {
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(std::size_t(L.nonZeros() + d));
  for (Index k = 0; k < L.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(L, k); it; ++it)
      if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
  for (Index i = 0; i < d; ++i) trips.emplace_back(0, i * (d + 1), 1.0);
  SparseMatrix M(L.rows(), L.cols());
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

double rate_scale(const LindbladGenerator& gen) { return std::max(gen.total_rate(), 1e-300); }

}  // namespace

double steady_state_residual(const LindbladGenerator& gen, const DenseMatrix& rho) {
  return gen.apply(rho).cwiseAbs().maxCoeff() / rate_scale(gen);
}

DensityMatrix steady_state(const LindbladGenerator& gen, const SteadyStateOptions& opts) {
  if (gen.total_rate() <= 0)
    throw DegenerateNullSpace("no dissipation: every Hamiltonian eigenprojector is stationary");
  const Index d = gen.dim();
  const SparseMatrix L = liouvillian_matrix(gen);
  const SparseMatrix M = bordered(L, d);
  Lu lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success)
    throw DegenerateNullSpace("bordered Liouvillian is singular: null space is not one-dimensional");
  Vector b = Vector::Zero(L.rows());
  b(0) = 1;
  Vector x = lu.solve(b);
  x += lu.solve(Vector(b - M * x));
  if (!x.allFinite()) throw DegenerateNullSpace("steady-state solve produced non-finite values");
  DenseMatrix rho = unvectorize(x, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double res = steady_state_residual(gen, rho);
  if (!(res < opts.residual_tol))
    throw DegenerateNullSpace("steady-state residual " + std::to_string(res) +
                              " too large; null space may be degenerate");
  return DensityMatrix(std::move(rho));
}

Eigen::VectorXcd liouvillian_spectrum(const LindbladGenerator& gen) {
  const DenseMatrix L(liouvillian_matrix(gen));
  Eigen::ComplexEigenSolver<DenseMatrix> es(L, false);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("dense Liouvillian eigensolve failed");
  return es.eigenvalues();
}

namespace {

GapResult pick_gap(const std::vector<cplx>& eigs, double thr) {
  GapResult g;
  bool found = false;
  for (cplx l : eigs) {
    if (std::abs(l.real()) < thr) continue;
    if (!found || std::abs(l.real()) < g.gap) {
      g.gap = std::abs(l.real());
      g.eigenvalue = l;
      found = true;
    }
  }
  if (!found) throw ConvergenceFailure("no eigenvalue with nonzero real part found");
  return g;
}

GapResult dense_gap(const LindbladGenerator& gen, const GapOptions& o) {
  const Eigen::VectorXcd ev = liouvillian_spectrum(gen);
  std::vector<cplx> eigs(ev.data(), ev.data() + ev.size());
  GapResult g = pick_gap(eigs, o.zero_threshold * rate_scale(gen));
  std::sort(eigs.begin(), eigs.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  eigs.resize(std::min<std::size_t>(eigs.size(), std::size_t(o.wanted) + 1));
  g.near_zero = eigs;
  g.method = "dense";
  return g;
}

GapResult arnoldi_gap(const LindbladGenerator& gen, const GapOptions& o) {
  const Index d = gen.dim();
  const SparseMatrix L = liouvillian_matrix(gen);
  const Index N = L.rows();
  Lu lu;
  lu.compute(bordered(L, d));
  if (lu.info() != Eigen::Success) throw DegenerateNullSpace("bordered Liouvillian is singular");

  auto trace_free = [d](Vector& v) {
    cplx tr = 0;
    for (Index i = 0; i < d; ++i) tr += v(i * (d + 1));
    for (Index i = 0; i < d; ++i) v(i * (d + 1)) -= tr / double(d);
  };
  // inverse of L on trace-free vectors
  auto apply_inverse = [&](const Vector& v) {
    Vector b = v;
    b(0) = 0;
    return Vector(lu.solve(b));
  };

  const int m = int(std::min<Index>(o.krylov_dim, N - 2));
  const int wanted = std::min(o.wanted, m);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> nd;
  Vector v(N);
  for (Index i = 0; i < N; ++i) v(i) = cplx(nd(rng), nd(rng));
  trace_free(v);

  const double thr = o.zero_threshold * rate_scale(gen);
  for (int restart = 0; restart <= o.max_restarts; ++restart) {
    DenseMatrix V = DenseMatrix::Zero(N, m + 1);
    DenseMatrix H = DenseMatrix::Zero(m + 1, m);
    V.col(0) = v / v.norm();
    int steps = m;
    for (int j = 0; j < m; ++j) {
      Vector w = apply_inverse(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const Vector h = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * h;
        H.col(j).head(j + 1) += h;
      }
      H(j + 1, j) = w.norm();
      if (std::abs(H(j + 1, j)) < 1e-13 * H.col(j).head(j + 1).norm()) {
        steps = j + 1;
        break;
      }
      V.col(j + 1) = w / H(j + 1, j);
    }
    Eigen::ComplexEigenSolver<DenseMatrix> es(H.topLeftCorner(steps, steps));
    if (es.info() != Eigen::Success) throw ConvergenceFailure("Hessenberg eigensolve failed");
    std::vector<int> order(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) order[std::size_t(k)] = k;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    const int use = std::min(wanted, steps);
    const double beta = steps < m ? 0.0 : std::abs(H(steps, steps - 1));
    bool converged = true;
    std::vector<cplx> lambdas;
    for (int q = 0; q < use; ++q) {
      const int k = order[std::size_t(q)];
      const cplx theta = es.eigenvalues()(k);
      const Vector y = es.eigenvectors().col(k);
      if (beta * std::abs(y(steps - 1)) > o.tol * std::abs(theta) * y.norm()) converged = false;
      lambdas.push_back(1.0 / theta);
    }
    if (converged || restart == o.max_restarts) {
      if (!converged) throw ConvergenceFailure("shift-invert Arnoldi did not converge");
      GapResult g = pick_gap(lambdas, thr);
      // true residual of the reported pair
      for (int q = 0; q < use; ++q) {
        const int k = order[std::size_t(q)];
        if (std::abs(1.0 / es.eigenvalues()(k) - g.eigenvalue) > 0) continue;
        Vector x = V.leftCols(steps) * es.eigenvectors().col(k);
        g.residual = (L * x - g.eigenvalue * x).norm() / x.norm();
        break;
      }
      g.near_zero = lambdas;
      g.method = "shift-invert-arnoldi";
      g.restarts = restart;
      return g;
    }
    v.setZero();
    for (int q = 0; q < use; ++q) {
      const int k = order[std::size_t(q)];
      Vector x = V.leftCols(steps) * es.eigenvectors().col(k);
      v += x / x.norm();
    }
    trace_free(v);
  }
  throw ConvergenceFailure("shift-invert Arnoldi did not converge");
}

}  // namespace

GapResult dissipative_gap(const LindbladGenerator& gen, const GapOptions& opts) {
  if (gen.dim() <= opts.dense_max_dim) return dense_gap(gen, opts);
  return arnoldi_gap(gen, opts);
}

}  // namespace fockblock
