#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fockblock/dynamics.hpp"
#include "fockblock/model.hpp"

namespace fockblock {

enum class NoiseKind { kNone, kAdditive, kMultiplicative, kPhase };
std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

// Gaussian error on a displacement by alpha_b. sigma is the amplitude
// spread (additive), the relative spread (multiplicative) or the phase
// spread in radians (phase).
struct NoiseModel {
  NoiseKind kind = NoiseKind::kNone;
  double sigma = 0;

  static NoiseModel none() { return {}; }
  static NoiseModel additive(double sigma) { return {NoiseKind::kAdditive, sigma}; }
  static NoiseModel multiplicative(double sigma) { return {NoiseKind::kMultiplicative, sigma}; }
  static NoiseModel phase(double sigma) { return {NoiseKind::kPhase, sigma}; }

  // |alpha_b|^2 sigma^2 for the phase kind, 0 otherwise.
  double diffusion(cplx alpha_b) const;
  double thermal_occupation(cplx alpha_b) const;
  // squeezing parameter of the equivalent Gaussian state (phase kind only)
  double squeezing(cplx alpha_b) const;
};

struct ProtocolConfig {
  double U = 0;
  double kappa = 0;
  cplx Lambda3Tilde{0, 0};
  double r = 1;
  cplx deltaLambda1{0, 0};
  std::optional<double> tau_block;
  std::optional<double> target_p1;
  NoiseModel noise;
  Truncation truncation{40};

  double t_pi() const;  // pi / (2 |L|)
  cplx alpha_b() const; // L / (2U)
  BlockadeSpec spec() const;
  void validate() const;
};

struct ProtocolResult {
  explicit ProtocolResult(DensityMatrix state) : final_state(std::move(state)) {}

  DensityMatrix final_state;  // displaced frame; equals the lab frame after the exact undo
  Moments moments;
  double g2_bare = 0;
  double g2_shifted = 0;  // exact moment shift for the final-displacement noise
  double g2_bound = 0;    // small-noise lower bound
  double p1 = 0;
  double leakage = 0;
  double tau_block = 0;
  double t_pi = 0;
  double nbar_th = 0;
  double squeezing = 0;
  double diffusion = 0;
  std::vector<std::string> warnings;
};

// Displaced-frame state after the first displacement and its noise.
DensityMatrix initial_state(const ProtocolConfig& cfg);

ProtocolResult run_protocol(const ProtocolConfig& cfg, const EvolveOptions& opts = {});

// <c^dag c^dag c c>/<c^dag c>^2 after adding nbar thermal quanta.
double g2_shifted_additive(const Moments& m, double nbar_th);
// Same for Y-quadrature diffusion by `diffusion`.
double g2_shifted_phase(const Moments& m, double diffusion);
double g2_bound_additive(const Moments& m, double nbar_th);
double g2_bound_phase(const Moments& m, double diffusion);
// |<a>|^2 <= 0.01 <n>, and |<aa>| <= 0.01 <n> when with_aa is set.
bool bound_assumptions_hold(const Moments& m, bool with_aa);

// Smallest time where P1 reaches target_p1 within 1e-4, bisected on the
// first rising segment below t_pi.
double optimize_tau_block(const ProtocolConfig& cfg, double target_p1, const EvolveOptions& opts = {});

// Average of |alpha+delta><alpha+delta| over complex Gaussian delta with
// E|delta|^2 = sigma^2.
DensityMatrix sample_displacement_channel(cplx alpha, double sigma, long samples, std::uint64_t seed, Truncation t);

}  // namespace fockblock
