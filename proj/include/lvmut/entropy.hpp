#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lvmut/dynamics.hpp"
#include "lvmut/model.hpp"

namespace lvmut {

struct LinearKernel {};     // H(s) = s
struct QuadraticKernel {};  // H(s) = s^2
struct PolynomialKernel {   // H(s) = sum_k coeffs[k] s^k
  Vector coeffs;
};

using EntropyKernel = std::variant<LinearKernel, QuadraticKernel, PolynomialKernel>;

double kernel_value(const EntropyKernel& kernel, double s);
double kernel_derivative(const EntropyKernel& kernel, double s);

/// "linear", "quadratic" or "poly:c0,c1,...". Throws Error{KernelMismatch} on bad input.
EntropyKernel parse_kernel(std::string_view text);
std::string kernel_name(const EntropyKernel& kernel);

/// sum_i vbar_i^2 H(v_i / vbar_i). Throws Error{NonPositiveReference | DimensionMismatch}.
double entropy_value(std::span<const double> v, std::span<const double> v_bar, const EntropyKernel& kernel);

struct EntropyReport {
  double h_value = 0.0;
  double d_value = 0.0;
  double gamma_term = 0.0;   // (1/K) sum_i vbar_i H'(x_i) Gamma_i v_i, Gamma_i = Psi_i(vbar) - Psi_i(v)
  double analytic_dt = 0.0;  // -D + gamma_term
};

/// The stationarity threshold a reference state must meet: max|rhs| <= 1e-8 * max(1, ||vbar||_inf).
bool is_stationary_reference(const Model& model, std::span<const double> v_bar);

/// Throws Error{AsymmetricMutation | NotStationaryReference | NonPositiveReference}.
EntropyReport dissipation(const Model& model, std::span<const double> v, std::span<const double> v_bar,
                          const EntropyKernel& kernel);

/// Max over interior recorded times of |central difference of H - analytic dH/dt| / max(1, |H|).
/// Throws Error{TooFewSamples} below 100 recorded states.
double identity_residual(const Model& model, const Trajectory& trajectory, std::span<const double> v_bar,
                         const EntropyKernel& kernel);

struct Decomposition {
  double lambda_coef = 0.0;
  Vector h;
  double e_h = 0.0;
  double beta = 0.0;
  double e_v = 0.0;
  double f_value = 0.0;  // log(E(v) / beta^2), +inf when beta = 0
};

/// v = lambda vbar + h with <h, vbar> = 0. Throws Error{ZeroReference}.
Decomposition decompose(std::span<const double> v, std::span<const double> v_bar);

/// Q(v) = sum_{i,j} mu_ij vbar_i vbar_j (v_j / vbar_j - v_i / vbar_i)^2
double dirichlet_form(const Model& model, std::span<const double> v, std::span<const double> v_bar);

struct LyapunovSeries {
  Vector times;
  Vector f;
  Vector df_dt;  // analytic, -Q(v) / E(v)
  /// max_k (F(t_{k+1}) - F(t_k)), positive when F increased somewhere.
  double max_increase = 0.0;
};

/// F = log(E(v) / beta^2) along a trajectory of a shared-competition model.
/// Throws Error{WrongInteractionKind | AsymmetricMutation}.
LyapunovSeries lyapunov_descent(const Model& model, const Trajectory& trajectory, std::span<const double> v_bar);

struct DiagnosticsRow {
  double t = 0.0;
  EntropyReport entropy;
  Decomposition decomposition;
};

/// One row per recorded state, for the diagnostics CSV.
std::vector<DiagnosticsRow> entropy_diagnostics(const Model& model, const Trajectory& trajectory,
                                                std::span<const double> v_bar, const EntropyKernel& kernel);

}  // namespace lvmut
