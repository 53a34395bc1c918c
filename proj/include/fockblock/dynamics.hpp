#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fockblock/integrators.hpp"
#include "fockblock/lindblad.hpp"

namespace fockblock {

class TimeGrid {
 public:
  TimeGrid(double t0, double t1, double stride);
  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  double stride() const noexcept { return stride_; }
  // t0 + k*stride up to t1; t1 is appended when it is not on the lattice.
  std::vector<double> times() const;

 private:
  double t0_, t1_, stride_;
};

struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> n_mean;
  std::vector<double> g2;  // NaN where <n> is below the g2 floor
  std::vector<double> P0, P1, P2;
  std::vector<double> P_ge2;  // population of n >= 2
  std::vector<double> leak_top3;
  std::size_t size() const noexcept { return times.size(); }
};

struct EvolveOptions {
  IntegratorOptions integrator;
  double leakage_budget = 1e-6;
  bool abort_on_leakage = true;
  bool check_positivity = true;
  // Re-run with tolerances tightened 16x (half the implicit step) and compare.
  bool convergence_check = false;
};

struct EvolveChecks {
  double max_trace_drift = 0;
  double max_hermiticity_error = 0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double max_leakage = 0;
  bool leakage_exceeded = false;
  double convergence_delta = std::numeric_limits<double>::quiet_NaN();
  IntegratorStats stats;
  bool ok(double leakage_budget) const;
};

struct EvolveResult {
  ObservableSeries series;
  DenseMatrix final_state;
  EvolveChecks checks;
};

EvolveResult evolve(const LindbladGenerator& gen, const DensityMatrix& rho0, const TimeGrid& grid,
                    const EvolveOptions& opts = {});

// Single-photon population of the blockaded steady state,
// 4|L/kappa|^2 / (1 + 8|L/kappa|^2).
double steady_p1_analytic(cplx Lambda3Tilde, double kappa);

struct EscapeFitOptions {
  // NaN start means 5/kappa, moved later until the approach is monotone.
  double window_start = std::numeric_limits<double>::quiet_NaN();
  double window_end = std::numeric_limits<double>::quiet_NaN();
  // Known plateau (for example from the steady state). Otherwise a
  // three-parameter exponential fit supplies it.
  std::optional<double> n_steady;
  double max_rms_residual = 0.05;
  double flat_tolerance = 1e-9;
  std::size_t min_points = 8;
};

struct EscapeFit {
  double gamma_esc = 0;
  double c = 0;
  double n_plateau = 0;
  double window_start = 0;
  double window_end = 0;
  double rms_residual = 0;
  std::size_t points = 0;
  bool rejected = false;
  std::string reason;
};

// Fits log|n_ss - n(t)| to a line; gamma_esc = -slope and
// c = gamma_esc kappa / |delta_Lambda1|^2.
EscapeFit fit_escape_rate(const ObservableSeries& series, cplx delta_Lambda1, double kappa,
                          const EscapeFitOptions& opts = {});

}  // namespace fockblock
