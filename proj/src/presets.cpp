#include "lvmut/presets.hpp"

#include <stdexcept>

namespace lvmut {
namespace {

Matrix symmetric2(double m) { return Matrix{{0.0, m}, {m, 0.0}}; }

std::vector<Preset> build_presets() {
  std::vector<Preset> out;

  out.push_back({"sym2", "two genotypes, equal rates r = [1, 1], mu = 0.1, K = 10, competition a = r",
                 "symmetric fitness-weighted competition",
                 build_model(2, {1.0, 1.0}, 10.0, symmetric2(0.1), UniformLinear{{1.0, 1.0}}), std::nullopt});

  out.push_back({"fit2asym", "two genotypes, r = [1, 2], mu = 0.1, K = 1, competition a = r",
                 "fitness-weighted competition with unequal growth rates",
                 build_model(2, {1.0, 2.0}, 1.0, symmetric2(0.1), UniformLinear{{1.0, 2.0}}), std::nullopt});

  out.push_back({"mut4", "four variants linked by point mutations at rate 0.01, r = [1, 1, 1, 1], K = 100, a = r",
                 "point-mutation matrix on four sequence variants",
                 build_model(4, {1.0, 1.0, 1.0, 1.0}, 100.0,
                             mutation_rates_from_generator(point_mutation_generator4(0.01)),
                             UniformLinear{{1.0, 1.0, 1.0, 1.0}}),
                 std::nullopt});

  {
    Matrix mu{{0.0, 0.05, 0.02}, {0.05, 0.0, 0.05}, {0.02, 0.05, 0.0}};
    Matrix alpha{{1.0, 0.9, 1.1}, {1.2, 1.0, 0.8}, {0.95, 1.05, 1.0}};
    out.push_back({"crowd3", "three genotypes, r = [1, 1.5, 2], K = 50, heterogeneous crowding index",
                   "crowding-index competition (equilibrium by continuation)",
                   build_model(3, {1.0, 1.5, 2.0}, 50.0, mu, CrowdingLinear{alpha}), std::nullopt});
  }

  {
    PerturbationSpec spec{{1.0, -1.0}, Matrix{{0.1, 0.1}, {0.1, 0.1}}};
    out.push_back({"pert2", "sym2 with a bounded tanh perturbation, eps = 1e-3, amp = [1, -1], w = 0.1",
                   "small bounded perturbation of fitness-weighted competition",
                   build_model(2, {1.0, 1.0}, 10.0, symmetric2(0.1),
                               Perturbed{UniformLinear{{1.0, 1.0}}, 1e-3, spec.amp, spec.w}),
                   spec});
  }
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> catalog = build_presets();
  return catalog;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw std::out_of_range("unknown preset '" + name + "'");
}

Model preset_model(const std::string& name) { return find_preset(name).model; }

}  // namespace lvmut
