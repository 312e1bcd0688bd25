#pragma once

#include <cstddef>
#include <optional>

#include "lvmut/linalg.hpp"

namespace lvmut {

struct PerronOptions {
  /// Shift by the minimal amount making the diagonal nonnegative. Ignored
  /// when `shift` is set.
  bool shift_to_nonneg = true;
  /// Explicit shift (the model-level call passes max_i sum_j mu_ij).
  std::optional<double> shift;
  double tol = 1e-13;
  std::size_t max_iter = 2'000'000;
  /// Optional positive start vector; defaults to the all-ones vector.
  Vector start;
};

struct PerronResult {
  double nu_p = 0.0;      // dominant eigenvalue of mat + mu_bar * I
  double lambda_p = 0.0;  // nu_p - mu_bar, dominant eigenvalue of mat
  Vector v_p;             // positive, unit Euclidean norm
  double mu_bar = 0.0;    // the shift actually applied
  std::size_t iterations = 0;
  double residual = 0.0;  // ||mat v_p - lambda_p v_p||_inf
};

/// Dominant eigenpair of an irreducible Metzler matrix by power iteration on
/// the shifted (nonnegative) matrix.
/// Throws Error{NotIrreducible | NoConvergence | DimensionMismatch}.
PerronResult perron_eigenpair(const Matrix& mat, const PerronOptions& options = {});

struct SymmetricSpectrum {
  Vector eigenvalues;  // descending
  Matrix eigenvectors; // orthonormal columns, column k pairs with eigenvalues[k]
};

/// Tolerance used by the symmetric routines: 1e-12 * max(1, max|entry|).
double symmetry_tolerance(const Matrix& mat);

/// Cyclic Jacobi eigendecomposition. Throws Error{NotSymmetric}.
SymmetricSpectrum symmetric_spectrum(const Matrix& mat);

/// Gaussian elimination with partial pivoting.
/// Throws Error{SingularMatrix | DimensionMismatch}.
Vector solve_linear(const Matrix& mat, std::span<const double> b);

/// Holds the spectrum of a symmetric matrix S so that e^{S t} v can be
/// evaluated for many t without refactoring.
class SymmetricExponential {
 public:
  explicit SymmetricExponential(const Matrix& sym);

  Vector apply(double t, std::span<const double> v) const;
  const SymmetricSpectrum& spectrum() const noexcept { return spectrum_; }

 private:
  SymmetricSpectrum spectrum_;
};

/// e^{sym t} v0. Throws Error{NotSymmetric}.
Vector expm_action(const Matrix& sym, double t, std::span<const double> v0);

/// Smallest eigenvalue strictly positive. Throws Error{NotSymmetric}.
bool is_positive_definite(const Matrix& sym);

/// (mat + mat^T) / 2
Matrix symmetric_part(const Matrix& mat);

}  // namespace lvmut
