#include "fockblock/cli/presets.hpp"

#include "fockblock/error.hpp"

namespace fockblock::cli {

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = {
      {"fig3", "evolve", "drive-mismatch dynamics at U = 0.4, Lambda3 = 2",
       R"(# rates in units of kappa, times in units of 1/kappa
[model]
Lambda3 = 2
U = 0.4
kappa = 1
r = 1
dim = 130

[time]
t0 = 0
t1 = 100
stride = 0.1

[integrator]
method = auto

[sweep]
param = delta_lambda1
values = 0.01, 0.02, 0.05, 0.1
)"},
      {"fig4", "evolve", "weak-drive dynamics at U = 0.075, delta_lambda1 = 0.01",
       R"(# rates in units of kappa, times in units of 1/kappa
[model]
Lambda3 = 1
U = 0.075
kappa = 1
r = 1
delta_lambda1 = 0.01
dim = 140

# escaped population heads for |alpha_ha|^2 ~ (3 Lambda3 / 2U)^2, far above
# any affordable dim at Lambda3 = 2, so the window stops at kappa t = 1.5
[time]
t0 = 0
t1 = 1.5
stride = 0.01

[sweep]
param = Lambda3
values = 0.125, 0.25, 0.5, 1, 2
)"},
      {"fig6", "antiresonance", "antiresonance width at kappa = 0.1 Lambda3",
       R"(# rates in units of kappa; Lambda3 = 10 puts kappa at 0.1 Lambda3
[model]
Lambda3 = 10
U = 5
kappa = 1
dim = 60

[antiresonance]
min_offset = 1e-7
max_offset = 0.3
per_side = 24

[sweep]
param = U
values = 6, 5, 4
)"},
      {"fig1c", "protocol", "full protocol with additive displacement noise",
       R"(# rates in units of kappa
[model]
Lambda3 = 2
kappa = 1
U = 0.4
dim = 40

[protocol]
target_p1 = 0.5

[noise]
kind = additive
sigma = 0.070710678118654752

[sweep]
param = U
values = 0.1, 0.2, 0.4
)"},
      {"figS1", "protocol", "full protocol with phase noise in the displacements",
       R"(# rates in units of kappa; sigma in radians
[model]
Lambda3 = 2
kappa = 1
U = 0.4
dim = 40

[protocol]
target_p1 = 0.5

[noise]
kind = phase
sigma = 0.01

[sweep]
param = U
values = 0.1, 0.2, 0.4
)"},
  };
  return list;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw InvalidArgument("unknown preset '" + name + "'");
}

}  // namespace fockblock::cli
