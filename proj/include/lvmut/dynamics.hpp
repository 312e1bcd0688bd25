#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lvmut/densela.hpp"
#include "lvmut/model.hpp"

namespace lvmut {

struct Trajectory {
  Vector times;
  std::vector<Vector> states;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double rtol = 0.0;
  double atol = 0.0;
  /// Set when the initial condition was identically zero (the trajectory stays at 0).
  bool zero_initial = false;

  std::size_t size() const noexcept { return times.size(); }
  double total(std::size_t k) const { return sum(states[k]); }
};

struct IntegrateOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  /// Maximum spacing of recorded states; 0 selects t_end / 500. States are
  /// recorded on the uniform grid t_end * k / m with m = ceil(t_end / record_every).
  double record_every = 0.0;
  std::size_t max_steps = 100'000'000;
};

/// Dormand-Prince 5(4) with PI step control. Steps that push a component
/// below -atol are rejected and retried at half size; smaller undershoots
/// are clamped to zero.
/// Throws Error{StepSizeUnderflow | NonFiniteState | DimensionMismatch | NonFiniteInput}.
Trajectory integrate(const Model& model, std::span<const double> v0, double t_end,
                     const IntegrateOptions& options = {});

/// v(t) = e^{(R+M)t} v0 / (1 + sum_j (a_j/K) int_0^t (e^{(R+M)s} v0)_j ds),
/// valid for shared linear competition and symmetric mu. `times` must be
/// nondecreasing and start at a value >= 0.
/// Throws Error{WrongInteractionKind | NotSymmetric}.
Trajectory closed_form_uniform_linear(const Model& model, std::span<const double> v0,
                                      std::span<const double> times);

struct EnvelopePair {
  Vector times;
  Vector n_min;  // logistic solution with rate xi_minus
  Vector n_max;  // logistic solution with rate xi_plus
  double xi_minus = 0.0;
  double xi_plus = 0.0;
};

/// u(t) = K n0 e^{xi t} / (K + n0 (e^{xi t} - 1)) for xi = min r and max r.
/// Requires fitness-weighted competition. Throws Error{WrongInteractionKind | ZeroInitialMass}.
EnvelopePair logistic_envelopes(const Model& model, double n0, std::span<const double> times);

/// Scalar logistic solution with rate xi, capacity K and initial value n0.
double logistic_solution(double xi, double big_k, double n0, double t);

/// min{1, sum(v0)/2, min_i r_i / (2 kappa0)}. Throws Error{ZeroInitialMass}.
double positivity_floor(const Model& model, std::span<const double> v0);

/// Componentwise bound e^{lambda_p t} ||v0||_inf v_p / min_i (v_p)_i.
Vector perron_growth_ceiling(const PerronResult& perron, std::span<const double> v0, double t);

/// Adaptive Gauss-Legendre quadrature: 8-point panels, bisected while a
/// panel and its two halves disagree by more than rel_tol * max(1, |value|).
double gauss_legendre_adaptive(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-12, int max_depth = 40);

}  // namespace lvmut
