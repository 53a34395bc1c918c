#pragma once

#include <string>
#include <vector>

#include "fockblock/lindblad.hpp"
#include "fockblock/model.hpp"

namespace fockblock {

struct SteadyStateOptions {
  // max |L rho| entry divided by the total jump rate
  double residual_tol = 1e-9;
};

// Null vector of the Liouvillian with the trace condition replacing the
// first row, one pass of iterative refinement.
DensityMatrix steady_state(const LindbladGenerator& gen, const SteadyStateOptions& opts = {});
double steady_state_residual(const LindbladGenerator& gen, const DenseMatrix& rho);

struct GapOptions {
  Index dense_max_dim = 24;
  int krylov_dim = 40;
  int max_restarts = 60;
  int wanted = 6;
  double tol = 1e-10;
  double zero_threshold = 1e-10;  // relative to the total jump rate
  unsigned long seed = 7;
};

struct GapResult {
  double gap = 0;
  cplx eigenvalue{0, 0};
  std::vector<cplx> near_zero;  // eigenvalues found nearest the origin
  std::string method;
  int restarts = 0;
  double residual = 0;  // |L x - lambda x| / |x| for the reported eigenvalue
};

// Smallest nonzero |Re lambda|. Dense eigensolve up to dense_max_dim,
// otherwise shift-invert Arnoldi at the origin on the trace-free subspace,
// which excludes the steady state.
GapResult dissipative_gap(const LindbladGenerator& gen, const GapOptions& opts = {});

// All eigenvalues of the dense superoperator (small dims only).
Eigen::VectorXcd liouvillian_spectrum(const LindbladGenerator& gen);

// kappa n (1 + 2n) exp(-n), n = |alpha_ha|^2.
double gamma_slow_perturbative(const BlockadeSpec& s);

struct FgrBranch {
  double energy = 0;
  double gamma = 0;
  double c = 0;
};

struct FgrRate {
  double gamma_esc = 0;  // mean over the blockade eigenstates
  double c = 0;
  std::vector<FgrBranch> branches;  // ordered by energy
  std::size_t unblockaded = 0;
  std::size_t groups = 0;
  bool regime_ok = true;  // kappa << |L|
};

// Golden-rule escape out of the blockade manifold for the mismatch
// -r L deltaLambda1 a^dag + h.c.; c = gamma kappa / |L deltaLambda1|^2.
FgrRate fgr_escape_rate(const BlockadeSpec& s, Truncation t);

struct AntiresonanceOptions {
  std::size_t workers = 1;
  double plateau_factor = 10;
  double rel_precision = 1e-3;  // bisection stop, relative to the width
};

struct AntiresonanceResult {
  std::vector<double> r;
  std::vector<double> n_ss;
  double floor = 0;    // <n> at r = 1
  double plateau = 0;  // off-resonant median
  double half_level = 0;
  double left = 0, right = 0;
  double fwhm = 0;
};

// Symmetric grid 1 +/- offsets, log-spaced in [min_offset, max_offset], plus r = 1.
std::vector<double> antiresonance_grid(double min_offset, double max_offset, int per_side);

AntiresonanceResult antiresonance_scan(cplx Lambda3Tilde, double U, double kappa,
                                       std::vector<double> r_grid, Truncation t,
                                       const AntiresonanceOptions& opts = {});

struct MetastableAnsatz {
  cplx alpha_ha{0, 0};
  Vector phi;  // unit norm, no weight on levels 0..r
  double normalization = 0;
  double coherent_overlap = 0;  // |<alpha_ha|Phi>|^2 for the best eigenstate Phi
  double ansatz_overlap = 0;    // |<phi|Phi>|^2
  double eigen_n = 0;           // <n> of Phi
  double eigen_energy = 0;
  std::vector<double> blockade_energies;
};

// Coherent state at the kappa-free large-amplitude point with the blockade
// levels projected out, compared with the eigenstates of the target
// Hamiltonian at deltaLambda1 = 0.
MetastableAnsatz metastable_ansatz(const BlockadeSpec& s, Truncation t);

}  // namespace fockblock
