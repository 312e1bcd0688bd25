#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvmut/dynamics.hpp"
#include "lvmut/equilibrium.hpp"
#include "lvmut/model.hpp"

namespace lvmut {

struct SpectralGapReport {
  Matrix d_matrix;       // D_ii = (1/vbar_i) sum_j mu_ij vbar_j
  Matrix m_tilde;        // mu with zero diagonal
  Vector eigenvalues;    // of D - Mtilde, ascending
  Matrix eigenvectors;   // columns, paired with `eigenvalues`
  double c1 = 0.0;       // second-smallest eigenvalue
  Vector kernel_vector;  // unit eigenvector of the smallest eigenvalue, positive orientation
  Vector c1_vector;      // unit eigenvector of c1
};

/// Throws Error{AsymmetricMutation | KernelMismatch | NonPositiveReference}.
SpectralGapReport spectral_gap(const Model& model, std::span<const double> v_bar);

/// h - (<h, vbar> / <vbar, vbar>) vbar
Vector project_orthogonal(std::span<const double> h, std::span<const double> v_bar);

/// sum_{i,j} mu_ij vbar_i vbar_j (h_j/vbar_j - h_i/vbar_i)^2 / sum h_i^2
double rayleigh_quotient(const Model& model, std::span<const double> h, std::span<const double> v_bar);

struct RateReport {
  double fitted_rate_eh = 0.0;   // slope of log E(h) on the tail window
  double fitted_rate_sup = 0.0;  // slope of log ||v - vbar||_inf on the tail window
  double predicted_c1 = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double r_squared = 0.0;        // of the log E(h) fit
  double r_squared_sup = 0.0;
  std::size_t points = 0;
};

/// Least-squares exponential rates over the last `tail_fraction` of the time
/// span, using points with E(h) > 1e-28. Throws Error{InsufficientTail} below 20 points.
RateReport convergence_rate(const Trajectory& trajectory, std::span<const double> v_bar, double tail_fraction,
                            double predicted_c1 = 0.0);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Uniform samples on [low, high]^n from a seeded std::mt19937_64, with a
/// fixed 53-bit mapping so the stream is reproducible everywhere. Samples
/// that come out identically zero are redrawn.
std::vector<Vector> sample_initial_conditions(std::size_t n, std::size_t count, std::uint64_t seed, double low,
                                              double high);

struct StabilityOptions {
  std::size_t n_samples = 20;
  std::uint64_t seed = 1;
  double t_end = 200.0;
  double tol = 1e-6;
  double low = 0.0;
  double high = -1.0;            // negative selects 2K
  std::vector<Vector> initial;   // used instead of random samples when nonempty
  bool force = false;            // run even when the model is outside theorem scope
  IntegrateOptions integrate;
  unsigned threads = 0;          // 0 picks std::thread::hardware_concurrency()
};

struct StabilitySample {
  Vector v0;
  Vector v_end;
  double gap_to_equilibrium = 0.0;
  bool excluded_zero = false;
};

struct StabilityReport {
  bool converged = false;
  double max_pairwise_gap = 0.0;
  double max_gap_to_equilibrium = 0.0;
  Vector attractor;  // the solver equilibrium
  std::vector<StabilitySample> samples;
  std::size_t excluded = 0;
  bool in_scope = true;
  std::string scope_note;
};

/// Whether the global attraction results cover this model, with a reason.
bool stability_in_scope(const Model& model, std::string* note = nullptr);

/// Integrates from every start, then compares endpoints with each other and
/// with the solver equilibrium. Throws Error{OutOfTheoremScope} unless forced.
StabilityReport global_stability_experiment(const Model& model, const StabilityOptions& options);

struct PerturbationSpec {
  Vector amp;
  Matrix w;
};

struct PerturbationRow {
  double eps = 0.0;
  Vector v_bar;
  double distance = 0.0;  // l1 distance to the eps = 0 equilibrium
  double ratio = 0.0;     // distance / sqrt(eps)
  double sigma = 0.0;     // eps * max_i |amp_i|
  bool failed = false;
  std::string message;
};

struct PerturbationTable {
  std::vector<PerturbationRow> rows;  // first row is eps = 0
  bool monotone_in_eps = true;        // reported, not enforced
};

/// Solves the perturbed equilibrium for every eps in the ascending grid.
/// Per-row solver failures mark the row and the sweep continues.
/// Throws Error{WrongInteractionKind | DimensionMismatch}.
PerturbationTable perturbation_sweep(const Model& base, const PerturbationSpec& perturbation,
                                     std::span<const double> eps_grid, unsigned threads = 0);

/// The base model with the given perturbation switched on at strength eps.
Model perturbed_model(const Model& base, const PerturbationSpec& perturbation, double eps);

}  // namespace lvmut
