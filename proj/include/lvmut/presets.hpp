#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lvmut/analysis.hpp"
#include "lvmut/model.hpp"

namespace lvmut {

struct Preset {
  std::string name;
  std::string description;
  std::string realizes;  // which modelling situation the preset stands for
  Model model;
  /// Perturbation shape for sweeps; set for the perturbed preset.
  std::optional<PerturbationSpec> perturbation;
};

const std::vector<Preset>& presets();

/// Throws std::out_of_range naming the unknown preset.
const Preset& find_preset(const std::string& name);

Model preset_model(const std::string& name);

}  // namespace lvmut
