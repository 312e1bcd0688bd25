#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvmut/analysis.hpp"
#include "lvmut/entropy.hpp"
#include "lvmut/equilibrium.hpp"
#include "lvmut/model.hpp"

namespace lvmut {

/// Malformed input document; `key()` is the dotted path of the offending entry.
class InputError : public std::runtime_error {
 public:
  InputError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// printf("%.17g")
std::string format_double(double x);

Model model_from_json(const nlohmann::json& j, const std::string& path = "model");
nlohmann::json model_to_json(const Model& model);

nlohmann::json to_json(const HypothesisReport& report);
nlohmann::json to_json(const EquilibriumResult& result);
nlohmann::json to_json(const SpectralGapReport& report);
nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const StabilityReport& report);
nlohmann::json to_json(const PerturbationTable& table);

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_entropy_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows);
void write_stability_csv(std::ostream& out, const StabilityReport& report);
void write_sweep_csv(std::ostream& out, const PerturbationTable& table);

struct SamplerSpec {
  std::size_t count = 1;
  std::uint64_t seed = 1;
  double low = 0.0;
  double high = -1.0;  // negative selects 2K
};

struct Scenario {
  Model model;
  std::string preset;
  std::optional<Vector> initial;
  std::optional<SamplerSpec> sampler;
  std::optional<double> t_end;
  double rtol = 1e-8;
  double atol = 1e-10;
  double record_every = 0.0;
  std::string outputs;
  std::vector<std::string> tasks;
  std::string kernel = "quadratic";
  std::string method = "auto";
  double tail_fraction = 0.5;
  double tol = 1e-6;
  Vector eps_grid;
  std::optional<PerturbationSpec> perturbation;
  bool force = false;
};

/// Task names accepted in a scenario's `tasks` list.
const std::vector<std::string>& scenario_tasks();

/// Parses a scenario document. Either `model` (object) or `preset` (name)
/// must be present. Throws InputError naming the offending key.
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace lvmut
