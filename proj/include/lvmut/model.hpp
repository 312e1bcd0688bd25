#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "lvmut/linalg.hpp"

namespace lvmut {

// Interaction families. Each one is a closed, parameterised form of the
// competition functional Psi so that monotonicity and coercivity can be
// decided from the coefficients.

/// Psi_i(v) = sum_j a_j v_j, shared by every genotype.
struct UniformLinear {
  Vector a;
};

/// Psi_i(v) = sum_j alpha_ij r_j v_j (alpha is the crowding index).
struct CrowdingLinear {
  Matrix alpha;
};

/// Psi_i(v) = sum_j a_j v_j + eps * amp_i * tanh(<w_i, v>).
struct Perturbed {
  UniformLinear base;
  double eps = 0.0;
  Vector amp;
  Matrix w;
};

using Interaction = std::variant<UniformLinear, CrowdingLinear, Perturbed>;

std::string interaction_kind(const Interaction& interaction);

/// A validated problem instance. Construct through build_model().
struct Model {
  std::size_t n = 0;
  Vector r;
  double big_k = 1.0;
  Matrix mu;  // zero diagonal
  Interaction interaction;

  bool is_uniform() const { return std::holds_alternative<UniformLinear>(interaction); }
  /// Uniform with a == r, the fitness-weighted competition.
  bool is_fitness_weighted() const;
  bool mu_is_symmetric() const;
};

/// Validates dimensions and signs and zeroes the diagonal of mu.
/// Throws Error{DimensionMismatch | NonFiniteInput | NonPositiveRate |
/// NegativeMutation | InvalidInteraction}.
Model build_model(std::size_t n, Vector r, double big_k, Matrix mu, Interaction interaction);

/// Converts a full generator matrix (rows summing to zero, as in the
/// point-mutation example) to off-diagonal rates. Throws DimensionMismatch
/// when a row does not sum to zero within tol.
Matrix mutation_rates_from_generator(const Matrix& generator, double tol = 1e-12);

/// The point-mutation generator for four variants differing by one or two
/// substitutions, with per-site mutation probability `rate`.
Matrix point_mutation_generator4(double rate);

struct CoercivityParams {
  double r_ball = 0.0;
  Vector k_exp;
  Vector c_low;
  Vector kappa;
  double kappa0() const;
};

struct HypothesisReport {
  bool h1_positivity = false;
  bool h1_symmetry = false;
  bool h1_irreducible = false;
  bool h1_monotone = false;
  bool h2_coercive = false;
  bool h3_half = false;
  bool h4_third = false;
  std::vector<std::string> details;

  bool h1() const { return h1_positivity && h1_symmetry && h1_irreducible && h1_monotone; }
  bool h1_to_h3() const { return h1() && h2_coercive && h3_half; }

  friend bool operator==(const HypothesisReport&, const HypothesisReport&) = default;
};

/// Coercivity constants (R, k_i, c_i) and unit-ball Lipschitz bounds kappa_i.
/// Entries of c_low are <= 0 when the family is not coercive.
CoercivityParams coercivity_params(const Model& model);

/// Strong connectivity of the graph {i -> j : m_ij > 0, i != j}.
bool is_irreducible(const Matrix& m);

HypothesisReport validate(const Model& model);

Vector interaction_values(const Model& model, std::span<const double> v);
Matrix interaction_gradient(const Model& model, std::span<const double> v);

/// dv/dt = v_i (r_i - Psi_i(v)/K) + sum_j mu_ij (v_j - v_i).
Vector rhs(const Model& model, std::span<const double> v);

/// R + M with M_ij = mu_ij off the diagonal and M_ii = -sum_j mu_ij.
Matrix growth_mutation_matrix(const Model& model);

/// max_i sum_j mu_ij
double mutation_shift(const Model& model);

}  // namespace lvmut
