#include "fockblock/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>

#include <Eigen/SparseLU>

#include "fockblock/error.hpp"

namespace fockblock {

std::string to_string(Method m) {
  switch (m) {
    case Method::kAuto: return "auto";
    case Method::kExplicit: return "explicit";
    case Method::kImplicit: return "implicit";
  }
  return "unknown";
}

Method choose_method(const LindbladGenerator& gen, double duration) {
  // Explicit steps are capped by stability at about 3/rho. Implicit steps are
  // accuracy-limited, roughly 100 per unit time plus start-up, and each costs
  // several sparse solves, about 14 explicit steps at dim 130.
  if (gen.dim() < 24) return Method::kExplicit;
  const double explicit_steps = gen.spectral_bound() * duration / 3.0;
  const double implicit_steps = 200 + 100 * duration;
  const double ratio = std::max(3.0, 14.0 * double(gen.dim()) / 130.0);
  return explicit_steps > ratio * implicit_steps ? Method::kImplicit : Method::kExplicit;
}

namespace {

double scaled_error(const DenseMatrix& err, const DenseMatrix& y0, const DenseMatrix& y1,
                    double atol, double rtol) {
  double worst = 0;
  const Index n = err.size();
  const cplx* e = err.data();
  const cplx* a = y0.data();
  const cplx* b = y1.data();
  for (Index k = 0; k < n; ++k) {
    const double sc = atol + rtol * std::max(std::abs(a[k]), std::abs(b[k]));
    worst = std::max(worst, std::abs(e[k]) / sc);
  }
  return worst;
}

void note_step(IntegratorStats& st, double h) {
  ++st.steps;
  st.smallest_step = std::min(st.smallest_step, h);
  st.largest_step = std::max(st.largest_step, h);
}

IntegratorStats run_explicit(const LindbladGenerator& gen, const DenseMatrix& rho0,
                             std::span<const double> times, const IntegratorOptions& o,
                             const Observer& observer) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous system

  IntegratorStats st;
  st.method = Method::kExplicit;
  const Index d = rho0.rows();
  DenseMatrix y = rho0, ynew(d, d), z(d, d), err(d, d), scratch(d, d);
  std::array<DenseMatrix, 7> k;
  for (auto& m : k) m.resize(d, d);
  auto f = [&](const DenseMatrix& in, DenseMatrix& out) {
    gen.apply_hermitian(in, out, scratch);
    ++st.rhs_evals;
  };

  double t = times[0];
  observer(0, t, y);
  f(y, k[0]);
  // Dormand-Prince is stable for |h lambda| up to about 3.3; the bound is a
  // Gershgorin estimate so this cap keeps every mode inside the region.
  const double h_cap = std::min(o.max_step, 3.0 / std::max(1e-300, gen.spectral_bound()));
  double h = h_cap;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double tout = times[i];
    while (t < tout) {
      if (st.steps + st.rejected >= o.max_steps) throw ToleranceFailure("explicit integrator exceeded max_steps");
      double hs = std::min(h, tout - t);
      const bool last = t + hs >= tout - 1e-13 * std::max(1.0, std::abs(tout));
      if (last) hs = tout - t;
      z = y + (hs * a21) * k[0];
      f(z, k[1]);
      z = y + hs * (a31 * k[0] + a32 * k[1]);
      f(z, k[2]);
      z = y + hs * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
      f(z, k[3]);
      z = y + hs * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
      f(z, k[4]);
      z = y + hs * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]);
      f(z, k[5]);
      ynew = y + hs * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] + b6 * k[5]);
      f(ynew, k[6]);
      err = hs * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
      const double e = scaled_error(err, y, ynew, o.atol, o.rtol);
      if (!std::isfinite(e)) throw ToleranceFailure("explicit integrator produced non-finite state");
      const double fac = e > 0 ? 0.9 * std::pow(e, -0.2) : 5.0;
      if (e <= 1) {
        note_step(st, hs);
        t = last ? tout : t + hs;
        y.swap(ynew);
        k[0].swap(k[6]);
        // keep the proposal from before the clip to the output time
        h = std::min(h_cap, std::max(h, hs) * std::clamp(fac, 0.2, 5.0));
      } else {
        ++st.rejected;
        h = hs * std::clamp(fac, 0.1, 0.9);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
          throw ToleranceFailure("explicit integrator step underflow at t=" + std::to_string(t));
      }
    }
    observer(i, tout, y);
  }
  return st;
}

// Hairer-Wanner SDIRK4, stiffly accurate, embedded third-order estimate.
constexpr double kGamma = 0.25;
constexpr std::array<std::array<double, 5>, 5> kA = {{
    {0.25, 0, 0, 0, 0},
    {0.5, 0.25, 0, 0, 0},
    {17.0 / 50, -1.0 / 25, 0.25, 0, 0},
    {371.0 / 1360, -137.0 / 2720, 15.0 / 544, 0.25, 0},
    {25.0 / 24, -49.0 / 48, 125.0 / 16, -85.0 / 12, 0.25},
}};
constexpr std::array<double, 5> kBhat = {59.0 / 48, -17.0 / 96, 225.0 / 32, -85.0 / 12, 0};

using Lu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

class LuCache {
 public:
  LuCache(const SparseMatrix& L, std::size_t capacity, IntegratorStats& st)
      : L_(L), capacity_(std::max<std::size_t>(1, capacity)), st_(st) {
    id_.resize(L.rows(), L.cols());
    id_.setIdentity();
  }

  Lu& get(double h) {
    auto it = entries_.find(h);
    if (it != entries_.end()) {
      it->second.used = ++clock_;
      return *it->second.lu;
    }
    if (entries_.size() >= capacity_) {
      auto victim = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
        return a.second.used < b.second.used;
      });
      entries_.erase(victim);
    }
    SparseMatrix m = id_ - cplx(kGamma * h, 0) * L_;
    m.makeCompressed();
    auto lu = std::make_unique<Lu>();
    lu->compute(m);
    if (lu->info() != Eigen::Success) throw ConvergenceFailure("sparse LU failed for implicit step");
    ++st_.factorizations;
    Lu& ref = *lu;
    entries_.emplace(h, Entry{std::move(lu), ++clock_});
    return ref;
  }

 private:
  struct Entry {
    std::unique_ptr<Lu> lu;
    unsigned long used;
  };
  const SparseMatrix& L_;
  SparseMatrix id_;
  std::size_t capacity_;
  IntegratorStats& st_;
  std::map<double, Entry> entries_;
  unsigned long clock_ = 0;
};

IntegratorStats run_implicit(const LindbladGenerator& gen, const DenseMatrix& rho0,
                             std::span<const double> times, const IntegratorOptions& o,
                             const Observer& observer) {
  IntegratorStats st;
  st.method = Method::kImplicit;
  const Index d = rho0.rows();
  const SparseMatrix L = liouvillian_matrix(gen);
  LuCache cache(L, o.lu_cache, st);

  Vector y = vectorize(rho0), z(y.size()), ynew(y.size()), err(y.size());
  std::array<Vector, 5> k;
  double t = times[0];
  observer(0, t, rho0);

  int level = o.min_level;
  int calm = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double span = times[i] - times[i - 1];
    while (std::ldexp(span, -level) > o.max_step) ++level;
    long pos = 0;  // steps taken at the current level within this interval
    while (pos < (1L << level)) {
      if (st.steps + st.rejected >= o.max_steps) throw ToleranceFailure("implicit integrator exceeded max_steps");
      const double h = std::ldexp(span, -level);
      Lu& lu = cache.get(h);
      for (int s = 0; s < 5; ++s) {
        z = y;
        for (int j = 0; j < s; ++j) z += (h * kA[s][j]) * k[j];
        k[s] = lu.solve(L * z);
        ++st.solves;
        ++st.rhs_evals;
      }
      ynew = z + (h * kGamma) * k[4];
      err.setZero();
      for (int s = 0; s < 5; ++s) err += (h * (kA[4][s] - kBhat[s])) * k[s];
      double e = 0;
      for (Index q = 0; q < y.size(); ++q) {
        const double sc = o.atol + o.rtol * std::max(std::abs(y(q)), std::abs(ynew(q)));
        e = std::max(e, std::abs(err(q)) / sc);
      }
      if (!std::isfinite(e)) throw ToleranceFailure("implicit integrator produced non-finite state");
      if (e > 1) {
        ++st.rejected;
        calm = 0;
        if (++level > o.max_level)
          throw ToleranceFailure("implicit integrator needs steps below span/2^" + std::to_string(o.max_level));
        pos *= 2;
        continue;
      }
      // project back onto Hermitian matrices; the LU solves leave ~1e-16 asymmetry
      {
        Eigen::Map<DenseMatrix> m(ynew.data(), d, d);
        DenseMatrix herm = 0.5 * (m + m.adjoint());
        m = herm;
      }
      y.swap(ynew);
      note_step(st, h);
      ++pos;
      // local error ~ h^4: doubling multiplies it by 16
      if (e < 1.0 / 40) ++calm; else calm = 0;
      if (calm >= 3 && level > o.min_level && pos % 2 == 0) {
        --level;
        pos /= 2;
        calm = 0;
      }
    }
    t = times[i];
    observer(i, t, unvectorize(y, d));
  }
  return st;
}

}  // namespace

IntegratorStats propagate(const LindbladGenerator& gen, const DenseMatrix& rho0,
                          std::span<const double> times, const IntegratorOptions& opts,
                          const Observer& observer) {
  if (rho0.rows() != gen.dim() || rho0.cols() != gen.dim())
    throw DimensionMismatch("initial state dim differs from generator");
  if (times.empty()) throw InvalidArgument("no output times");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidArgument("output times must increase strictly");
  Method m = opts.method;
  if (m == Method::kAuto) m = choose_method(gen, times.back() - times.front());
  return m == Method::kImplicit ? run_implicit(gen, rho0, times, opts, observer)
                                : run_explicit(gen, rho0, times, opts, observer);
}

}  // namespace fockblock
