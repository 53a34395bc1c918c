#include "fockblock/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "fockblock/error.hpp"

namespace fockblock {

TimeGrid::TimeGrid(double t0, double t1, double stride) : t0_(t0), t1_(t1), stride_(stride) {
  if (!(t1 > t0)) throw InvalidArgument("time grid needs t1 > t0");
  if (!(stride > 0)) throw InvalidArgument("time grid needs stride > 0");
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out;
  const double span = t1_ - t0_;
  const long n = long(std::floor(span / stride_ * (1 + 1e-12)));
  out.reserve(std::size_t(n + 2));
  for (long k = 0; k <= n; ++k) out.push_back(t0_ + double(k) * stride_);
  if (t1_ - out.back() > 1e-9 * stride_) out.push_back(t1_);
  else out.back() = std::min(out.back(), t1_);
  return out;
}

bool EvolveChecks::ok(double leakage_budget) const {
  return max_trace_drift < 1e-8 && max_hermiticity_error < 1e-10 && min_eigenvalue >= -1e-8 &&
         max_leakage <= leakage_budget;
}

namespace {

struct Recorder {
  const EvolveOptions& opts;
  ObservableSeries series;
  EvolveChecks checks;
  double initial_trace = 1;

  void record(double t, const DenseMatrix& rho) {
    const Index d = rho.rows();
    Eigen::VectorXd p(d);
    for (Index k = 0; k < d; ++k) p(k) = rho(k, k).real();
    const Moments m = moments(rho);
    series.times.push_back(t);
    series.n_mean.push_back(m.n);
    series.g2.push_back(m.n > kG2Floor ? m.n2 / (m.n * m.n) : std::numeric_limits<double>::quiet_NaN());
    series.P0.push_back(p(0));
    series.P1.push_back(p(1));
    series.P2.push_back(d > 2 ? p(2) : 0.0);
    series.P_ge2.push_back(d > 2 ? p.tail(d - 2).sum() : 0.0);
    const double leak = p.tail(std::min<Index>(3, d)).sum();
    series.leak_top3.push_back(leak);

    checks.max_trace_drift = std::max(checks.max_trace_drift, std::abs(rho.trace().real() - initial_trace));
    checks.max_hermiticity_error =
        std::max(checks.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (opts.check_positivity) {
      DenseMatrix h = 0.5 * (rho + rho.adjoint());
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
      checks.min_eigenvalue = std::min(checks.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    checks.max_leakage = std::max(checks.max_leakage, leak);
    if (leak > opts.leakage_budget) {
      checks.leakage_exceeded = true;
      if (opts.abort_on_leakage)
        throw LeakageExceeded("population " + std::to_string(leak) + " in the top 3 of " +
                                  std::to_string(d) + " levels at t=" + std::to_string(t) +
                                  " exceeds the budget; raise dim",
                              leak, t);
    }
  }
};

EvolveResult evolve_once(const LindbladGenerator& gen, const DensityMatrix& rho0,
                         const std::vector<double>& times, const EvolveOptions& opts) {
  Recorder rec{opts, {}, {}, rho0.trace()};
  DenseMatrix last;
  rec.checks.stats = propagate(gen, rho0.matrix(), times, opts.integrator,
                               [&](std::size_t i, double t, const DenseMatrix& rho) {
                                 rec.record(t, rho);
                                 if (i + 1 == times.size()) last = rho;
                               });
  return EvolveResult{std::move(rec.series), std::move(last), rec.checks};
}

}  // namespace

EvolveResult evolve(const LindbladGenerator& gen, const DensityMatrix& rho0, const TimeGrid& grid,
                    const EvolveOptions& opts) {
  if (rho0.dim() != gen.dim()) throw DimensionMismatch("initial state dim differs from generator");
  const std::vector<double> times = grid.times();
  EvolveResult res = evolve_once(gen, rho0, times, opts);
  if (opts.convergence_check) {
    EvolveOptions fine = opts;
    fine.integrator.rtol /= 16;
    fine.integrator.atol /= 16;
    fine.integrator.method = res.checks.stats.method;
    fine.check_positivity = false;
    const EvolveResult ref = evolve_once(gen, rho0, times, fine);
    double delta = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      delta = std::max(delta, std::abs(res.series.n_mean[i] - ref.series.n_mean[i]));
      delta = std::max(delta, std::abs(res.series.P0[i] - ref.series.P0[i]));
      delta = std::max(delta, std::abs(res.series.P1[i] - ref.series.P1[i]));
      delta = std::max(delta, std::abs(res.series.P2[i] - ref.series.P2[i]));
    }
    res.checks.convergence_delta = delta;
  }
  return res;
}

double steady_p1_analytic(cplx L3, double kappa) {
  if (!(kappa > 0)) throw InvalidArgument("steady_p1_analytic requires kappa > 0");
  const double x = std::norm(L3) / (kappa * kappa);
  return 4 * x / (1 + 8 * x);
}

namespace {

struct LineFit {
  double slope, intercept, rms;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / double(n));
  return f;
}

// n(t) = n_inf - A exp(-g (t - t0)); linear in (n_inf, A) for fixed g.
struct ExpFit {
  double n_inf, amp, rate, sse;
};

ExpFit exp_fit_for_rate(const std::vector<double>& t, const std::vector<double>& n, double g) {
  const std::size_t m = t.size();
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (std::size_t i = 0; i < m; ++i) {
    A(Index(i), 0) = 1;
    A(Index(i), 1) = -std::exp(-g * (t[i] - t[0]));
    b(Index(i)) = n[i];
  }
  Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  return ExpFit{coef(0), coef(1), g, (A * coef - b).squaredNorm()};
}

ExpFit exp_fit(const std::vector<double>& t, const std::vector<double>& n) {
  const double span = t.back() - t.front();
  double lo = std::log(1e-6 / span), hi = std::log(50 / span);
  const int scan = 240;
  double best_x = lo, best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= scan; ++k) {
    const double x = lo + (hi - lo) * k / scan;
    const double s = exp_fit_for_rate(t, n, std::exp(x)).sse;
    if (s < best) {
      best = s;
      best_x = x;
    }
  }
  const double step = (hi - lo) / scan;
  double a = best_x - step, b = best_x + step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = exp_fit_for_rate(t, n, std::exp(c)).sse, fd = exp_fit_for_rate(t, n, std::exp(d)).sse;
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = exp_fit_for_rate(t, n, std::exp(c)).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = exp_fit_for_rate(t, n, std::exp(d)).sse;
    }
  }
  return exp_fit_for_rate(t, n, std::exp(0.5 * (a + b)));
}

}  // namespace

EscapeFit fit_escape_rate(const ObservableSeries& s, cplx dL1, double kappa, const EscapeFitOptions& o) {
  if (s.size() < 2) throw InvalidArgument("series too short for an escape fit");
  if (!(kappa > 0)) throw InvalidArgument("fit_escape_rate requires kappa > 0");
  const bool auto_start = std::isnan(o.window_start);
  const double t_start = auto_start ? s.times.front() + 5 / kappa : o.window_start;
  const double t_end = std::isnan(o.window_end) ? s.times.back() : o.window_end;

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.times[i] >= t_start - 1e-12 && s.times[i] <= t_end + 1e-12) idx.push_back(i);
  if (idx.size() < o.min_points) throw FitRejected("fewer than " + std::to_string(o.min_points) + " points in window");

  EscapeFit fit;
  double lo = s.n_mean[idx.front()], hi = lo;
  for (auto i : idx) {
    lo = std::min(lo, s.n_mean[i]);
    hi = std::max(hi, s.n_mean[i]);
  }
  if (hi - lo <= o.flat_tolerance * std::max(1.0, std::abs(hi))) {
    fit.rejected = true;
    fit.reason = "flat";
    fit.n_plateau = 0.5 * (hi + lo);
    fit.window_start = s.times[idx.front()];
    fit.window_end = s.times[idx.back()];
    fit.points = idx.size();
    return fit;
  }

  // direction of the late-time approach
  const double trend = s.n_mean[idx.back()] - s.n_mean[idx.front()];
  const double sign = trend >= 0 ? 1.0 : -1.0;
  std::size_t first = 0;
  for (std::size_t k = 1; k < idx.size(); ++k)
    if (sign * (s.n_mean[idx[k]] - s.n_mean[idx[k - 1]]) < 0) first = k;
  if (first > 0) {
    if (!auto_start) throw FitRejected("n(t) is not monotone inside the fit window");
    idx.erase(idx.begin(), idx.begin() + long(first));
    if (idx.size() < o.min_points) throw FitRejected("monotone part of the window is too short");
  }

  std::vector<double> t, n;
  for (auto i : idx) {
    t.push_back(s.times[i]);
    n.push_back(s.n_mean[i]);
  }
  fit.n_plateau = o.n_steady ? *o.n_steady : exp_fit(t, n).n_inf;

  std::vector<double> y;
  for (double v : n) {
    const double gap = sign * (fit.n_plateau - v);
    if (!(gap > 0)) throw FitRejected("n(t) crosses the plateau inside the window");
    y.push_back(std::log(gap));
  }
  const LineFit lf = fit_line(t, y);
  fit.gamma_esc = -lf.slope;
  fit.rms_residual = lf.rms;
  fit.window_start = t.front();
  fit.window_end = t.back();
  fit.points = t.size();
  const double d2 = std::norm(dL1);
  fit.c = d2 > 0 ? fit.gamma_esc * kappa / d2 : std::numeric_limits<double>::quiet_NaN();
  if (lf.rms > o.max_rms_residual)
    throw FitRejected("log-linear fit residual " + std::to_string(lf.rms) + " above threshold");
  return fit;
}

}  // namespace fockblock
