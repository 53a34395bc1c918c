#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>

#include "fockblock/lindblad.hpp"

namespace fockblock {

enum class Method { kAuto, kExplicit, kImplicit };
std::string to_string(Method m);

struct IntegratorOptions {
  Method method = Method::kAuto;
  double rtol = 1e-8;
  double atol = 1e-10;
  long max_steps = 20'000'000;
  double max_step = std::numeric_limits<double>::infinity();
  // Implicit scheme: steps are (output interval)/2^level.
  int min_level = 0;
  int max_level = 40;
  std::size_t lu_cache = 6;
};

struct IntegratorStats {
  Method method = Method::kAuto;
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;
  long factorizations = 0;
  long solves = 0;
  double smallest_step = std::numeric_limits<double>::infinity();
  double largest_step = 0;
};

// Called at every entry of the output time list with the state there.
using Observer = std::function<void(std::size_t index, double t, const DenseMatrix& rho)>;

// Resolves kAuto from a cost estimate for integrating over `duration`.
Method choose_method(const LindbladGenerator& gen, double duration);

// Integrates from times.front() through every later output time.
// Explicit: Dormand-Prince 5(4) applied in operator form.
// Implicit: L-stable SDIRK4 (gamma = 1/4) on the sparse superoperator with
// cached LU factorizations of (I - h gamma L).
IntegratorStats propagate(const LindbladGenerator& gen, const DenseMatrix& rho0,
                          std::span<const double> times, const IntegratorOptions& opts,
                          const Observer& observer);

}  // namespace fockblock
