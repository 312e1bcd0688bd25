#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lvmut/densela.hpp"
#include "lvmut/model.hpp"

namespace lvmut {

enum class EquilibriumMethod { PerronScaling, Homotopy };

std::string to_string(EquilibriumMethod method);

struct HomotopyCheckpoint {
  double s = 0.0;
  Vector v;
  double residual = 0.0;  // max_i |((R+M)v)_i - Psi^s_i(v) v_i / K|
  double mass = 0.0;      // sum_i v_i
  std::size_t iterations = 0;
};

struct EquilibriumResult {
  Vector v_bar;
  double alpha_bar = 0.0;  // K * lambda_p
  double lambda_p = 0.0;
  double nu_p = 0.0;
  Vector v_p;
  double residual = 0.0;   // max_i |rhs_i(v_bar)|
  EquilibriumMethod method = EquilibriumMethod::PerronScaling;
  std::vector<HomotopyCheckpoint> path;
  double box_lo = 0.0;
  double box_hi = 0.0;
  std::size_t newton_iterations = 0;
  std::vector<std::string> warnings;
};

struct HomotopyConfig {
  std::size_t s_steps = 21;
  double inner_tol = 1e-12;
  std::size_t max_inner = 10'000;
  double damping = 0.5;
  double box_lo = 0.0;
  double box_hi = 0.0;
  std::size_t newton_max = 50;
  /// Set when the box could not be derived from the model and the wide
  /// fallback [1e-6 K, 1e3 K] is in use.
  bool box_is_fallback = false;
};

/// Defaults with the a-priori box on sum(v) derived from the spectrum of the
/// symmetric part of R+M and the coefficient bounds of the interaction.
HomotopyConfig default_homotopy_config(const Model& model);

/// Perron data of R+M with the shift max_i sum_j mu_ij.
PerronResult model_perron(const Model& model);

/// v_bar = K lambda_p v_p / sum_j a_j (v_p)_j.
/// Throws Error{WrongInteractionKind | NotIrreducible | NonPositivePerron | NoConvergence}.
EquilibriumResult equilibrium_uniform(const Model& model);

/// Continuation in s of Psi^s_i = s Psi_i + (1 - s) Psi_1 from the shared
/// problem at s = 0, finished by a Newton polish at s = 1.
/// Throws Error{Hypothesis3Violated | InnerNoConvergence | LeftAprioriBox | NotIrreducible}.
EquilibriumResult equilibrium_homotopy(const Model& model, const HomotopyConfig& config);
EquilibriumResult equilibrium_homotopy(const Model& model);

/// Uniform-linear models use Perron scaling, everything else the homotopy.
EquilibriumResult equilibrium_auto(const Model& model);

/// max_i |rhs_i(v)|
double residual(const Model& model, std::span<const double> v);

}  // namespace lvmut
