#include "fockblock/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>

#include "fockblock/error.hpp"
#include "fockblock/semiclassical.hpp"

namespace fockblock {

double gamma_slow_perturbative(const BlockadeSpec& s) {
  const double n = std::norm(alpha_ha_perturbative(s));
  return s.kappa * n * (1 + 2 * n) * std::exp(-n);
}

namespace {

Index blockade_index(double r) {
  const double ri = std::round(r);
  if (std::abs(r - ri) > 1e-12 || ri < 0)
    throw BlockadeIdentificationFailure("blockade manifold needs a non-negative integer r, got " + std::to_string(r));
  return Index(ri);
}

struct Eigensystem {
  Eigen::VectorXd energies;
  DenseMatrix vectors;
};

Eigensystem diagonalize(const Operator& H) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(H.dense());
  if (es.info() != Eigen::Success) throw ConvergenceFailure("Hamiltonian eigensolve failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

FgrRate fgr_escape_rate(const BlockadeSpec& s, Truncation t) {
  if (!(s.kappa > 0)) throw InvalidArgument("fgr_escape_rate requires kappa > 0");
  const Index rb = blockade_index(s.r);
  if (t.dim() <= rb + 2) throw TruncationInadequate("truncation too small for the blockade manifold");
  BlockadeSpec ideal = s;
  ideal.deltaLambda1 = 0;
  const Eigensystem sys = diagonalize(build_target_hamiltonian(ideal, t));
  const Index d = t.dim();

  std::vector<Index> inside, outside;
  for (Index j = 0; j < d; ++j) {
    const double w = sys.vectors.col(j).head(rb + 1).squaredNorm();
    if (w > 1 - 1e-8) inside.push_back(j);
    else if (w < 1e-8) outside.push_back(j);
    else
      throw BlockadeIdentificationFailure("eigenstate " + std::to_string(j) + " has weight " + std::to_string(w) +
                                          " on the blockade levels");
  }
  if (inside.size() != std::size_t(rb + 1))
    throw BlockadeIdentificationFailure("found " + std::to_string(inside.size()) + " blockade eigenstates, expected " +
                                        std::to_string(rb + 1));

  const SparseMatrix ad = creation(t).sparse();
  Eigen::VectorXd widths(d);
  for (Index j = 0; j < d; ++j) {
    double n = 0;
    for (Index k = 0; k < d; ++k) n += double(k) * std::norm(sys.vectors(k, j));
    widths(j) = s.kappa * n;
  }

  // group unblockaded states closer than their widths
  std::vector<std::vector<Index>> groups;
  for (Index j : outside) {
    if (!groups.empty()) {
      const Index prev = groups.back().back();
      if (sys.energies(j) - sys.energies(prev) < std::max(widths(j), widths(prev))) {
        groups.back().push_back(j);
        continue;
      }
    }
    groups.push_back({j});
  }

  FgrRate out;
  out.unblockaded = outside.size();
  out.groups = groups.size();
  out.regime_ok = s.kappa < 0.1 * std::abs(s.Lambda3Tilde);
  const double coupling = std::norm(s.r * s.delta_Lambda1_abs());
  for (Index b : inside) {
    const Vector drive = ad * sys.vectors.col(b);
    const double Eb = sys.energies(b);
    double sum = 0;
    for (const auto& g : groups) {
      double w = 0, E = 0, gam = 0;
      for (Index j : g) {
        const double m2 = std::norm(sys.vectors.col(j).dot(drive));
        w += m2;
        E += m2 * sys.energies(j);
        gam += m2 * widths(j);
      }
      if (w == 0) continue;
      E /= w;
      gam /= w;
      sum += w * (0.5 * gam) / ((E - Eb) * (E - Eb) + 0.25 * gam * gam);
    }
    FgrBranch br;
    br.energy = Eb;
    br.c = sum * s.kappa * s.r * s.r;
    br.gamma = coupling * sum;
    out.branches.push_back(br);
  }
  std::sort(out.branches.begin(), out.branches.end(),
            [](const FgrBranch& a, const FgrBranch& b) { return a.energy < b.energy; });
  for (const auto& br : out.branches) {
    out.gamma_esc += br.gamma;
    out.c += br.c;
  }
  out.gamma_esc /= double(out.branches.size());
  out.c /= double(out.branches.size());
  return out;
}

std::vector<double> antiresonance_grid(double min_offset, double max_offset, int per_side) {
  if (!(min_offset > 0) || !(max_offset > min_offset) || per_side < 2)
    throw InvalidArgument("antiresonance_grid needs 0 < min_offset < max_offset and per_side >= 2");
  std::vector<double> g{1.0};
  for (int k = 0; k < per_side; ++k) {
    const double off = min_offset * std::pow(max_offset / min_offset, double(k) / (per_side - 1));
    g.push_back(1 - off);
    g.push_back(1 + off);
  }
  std::sort(g.begin(), g.end());
  return g;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AntiresonanceResult antiresonance_scan(cplx L3, double U, double kappa, std::vector<double> grid, Truncation t,
                                       const AntiresonanceOptions& o) {
  if (!(kappa > 0)) throw InvalidArgument("antiresonance_scan requires kappa > 0");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (!std::binary_search(grid.begin(), grid.end(), 1.0)) grid.insert(std::upper_bound(grid.begin(), grid.end(), 1.0), 1.0);
  if (grid.front() >= 1 || grid.back() <= 1) throw UnresolvedDip("r grid must bracket r = 1");

  auto n_at = [&](double r) {
    BlockadeSpec s;
    s.Lambda3Tilde = L3;
    s.U = U;
    s.kappa = kappa;
    s.r = r;
    const auto gen = LindbladGenerator::cavity(build_target_hamiltonian(s, t), kappa);
    return moments(steady_state(gen)).n;
  };

  AntiresonanceResult res;
  res.r = grid;
  res.n_ss.assign(grid.size(), 0);
  {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) {
        try {
          res.n_ss[i] = n_at(grid[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::max<std::size_t>(1, o.workers); ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  const std::size_t center = std::size_t(std::lower_bound(grid.begin(), grid.end(), 1.0) - grid.begin());
  res.floor = res.n_ss[center];
  const double max_off = std::max(1 - grid.front(), grid.back() - 1);

  auto crossings = [&](double plateau, double& left, double& right) {
    const double h = res.floor + 0.5 * (plateau - res.floor);
    if (!(plateau > res.floor)) throw UnresolvedDip("no dip: plateau does not exceed the r=1 value");
    auto refine = [&](double a, double b) {
      // n(a) < h <= n(b)
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b);
        if (std::abs(b - a) < o.rel_precision * std::abs(mid - 1)) break;
        (n_at(mid) < h ? a : b) = mid;
      }
      return 0.5 * (a + b);
    };
    bool found = false;
    for (std::size_t k = center + 1; k < grid.size(); ++k)
      if (res.n_ss[k] >= h) {
        right = refine(grid[k - 1], grid[k]);
        found = true;
        break;
      }
    if (!found) throw UnresolvedDip("no half-depth crossing for r > 1");
    found = false;
    for (std::size_t k = center; k-- > 0;)
      if (res.n_ss[k] >= h) {
        left = refine(grid[k + 1], grid[k]);
        found = true;
        break;
      }
    if (!found) throw UnresolvedDip("no half-depth crossing for r < 1");
    return h;
  };

  // first width from the median of the whole scan, then the plateau from
  // points well outside that width
  std::vector<double> others;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (k != center) others.push_back(res.n_ss[k]);
  double left = 0, right = 0;
  crossings(median(others), left, right);
  const double est = right - left;
  const double cut = std::min(o.plateau_factor * est, 0.5 * max_off);
  std::vector<double> far;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::abs(grid[k] - 1) > cut) far.push_back(res.n_ss[k]);
  if (far.size() < 3) throw UnresolvedDip("fewer than 3 grid points on the off-resonant plateau");
  res.plateau = median(far);
  res.half_level = crossings(res.plateau, left, right);
  res.left = left;
  res.right = right;
  res.fwhm = right - left;
  return res;
}

MetastableAnsatz metastable_ansatz(const BlockadeSpec& s, Truncation t) {
  const Index rb = blockade_index(s.r);
  BlockadeSpec closed = s;
  closed.kappa = 0;
  closed.deltaLambda1 = 0;
  MetastableAnsatz out;
  out.alpha_ha = alpha_ha_perturbative(closed);
  const KetState coh = coherent_state(out.alpha_ha, t);
  Vector phi = coh.amplitudes();
  phi.head(rb + 1).setZero();
  const double norm = phi.norm();
  out.normalization = 1 / norm;
  out.phi = phi / norm;

  const Eigensystem sys = diagonalize(build_target_hamiltonian(closed, t));
  Index best = 0;
  double best_ov = -1;
  for (Index j = 0; j < t.dim(); ++j) {
    const double w = sys.vectors.col(j).head(rb + 1).squaredNorm();
    if (w > 1 - 1e-8) out.blockade_energies.push_back(sys.energies(j));
    const double ov = std::norm(sys.vectors.col(j).dot(out.phi));
    if (ov > best_ov) {
      best_ov = ov;
      best = j;
    }
  }
  const Vector Phi = sys.vectors.col(best);
  out.ansatz_overlap = best_ov;
  out.coherent_overlap = std::norm(Phi.dot(coh.amplitudes()));
  out.eigen_energy = sys.energies(best);
  double n = 0;
  for (Index k = 0; k < t.dim(); ++k) n += double(k) * std::norm(Phi(k));
  out.eigen_n = n;
  return out;
}

}  // namespace fockblock
