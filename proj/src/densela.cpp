#include "lvmut/densela.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lvmut/errors.hpp"
#include "lvmut/model.hpp"

namespace lvmut {
namespace {

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square() || m.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " needs a non-empty square matrix");
}

void require_symmetric(const Matrix& m) {
  require_square(m, "symmetric routine");
  if (!is_symmetric(m, symmetry_tolerance(m)))
    throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
}

void normalize_l2(Vector& v) {
  const double s = norm_l2(v);
  for (double& x : v) x /= s;
}

}  // namespace

double symmetry_tolerance(const Matrix& mat) { return 1e-12 * std::max(1.0, max_abs_entry(mat)); }

Matrix symmetric_part(const Matrix& mat) { return 0.5 * (mat + mat.transposed()); }

PerronResult perron_eigenpair(const Matrix& mat, const PerronOptions& options) {
  require_square(mat, "perron_eigenpair");
  const std::size_t n = mat.rows();

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && mat(i, j) < 0.0)
        throw Error(ErrorCode::NotIrreducible, "matrix has a negative off-diagonal entry");
  if (!is_irreducible(mat)) throw Error(ErrorCode::NotIrreducible, "matrix graph is not strongly connected");

  double min_diag = mat(0, 0);
  for (std::size_t i = 1; i < n; ++i) min_diag = std::min(min_diag, mat(i, i));

  double shift = 0.0;
  if (options.shift) {
    shift = *options.shift;
    if (min_diag + shift < 0.0)
      throw Error(ErrorCode::NotIrreducible, "explicit shift leaves a negative diagonal entry");
  } else if (options.shift_to_nonneg) {
    shift = std::max(0.0, -min_diag);
    // A zero on the diagonal can make the shifted matrix periodic, in which
    // case the power iteration oscillates.
    if (min_diag + shift == 0.0) shift += 0.5 * std::max(norm_inf(mat), 1.0);
  } else if (min_diag < 0.0) {
    throw Error(ErrorCode::NotIrreducible, "matrix has a negative diagonal and shifting is disabled");
  }

  Matrix b = mat;
  for (std::size_t i = 0; i < n; ++i) b(i, i) += shift;

  PerronResult res;
  res.mu_bar = shift;
  if (n == 1) {
    res.nu_p = b(0, 0);
    res.lambda_p = mat(0, 0);
    res.v_p = {1.0};
    return res;
  }

  Vector v = options.start.empty() ? Vector(n, 1.0) : options.start;
  if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, "start vector has the wrong length");
  for (double x : v)
    if (!(x > 0.0)) throw Error(ErrorCode::DimensionMismatch, "start vector must be strictly positive");
  normalize_l2(v);

  const double scale = std::max(norm_inf(b), 1e-300);
  double nu_prev = 0.0;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    Vector w = b * v;
    const double nu = dot(v, w);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(w[i] - nu * v[i]));
    const bool settled = it > 1 && std::abs(nu - nu_prev) < options.tol * scale && resid < options.tol * scale;
    if (settled) {
      res.nu_p = nu;
      res.lambda_p = nu - shift;
      res.iterations = it;
      res.residual = resid;
      if (*std::min_element(v.begin(), v.end()) <= 0.0)
        throw Error(ErrorCode::NoConvergence, "power iteration produced a non-positive eigenvector");
      res.v_p = std::move(v);
      return res;
    }
    nu_prev = nu;
    normalize_l2(w);
    v = std::move(w);
  }
  std::ostringstream os;
  os << "power iteration did not converge in " << options.max_iter << " iterations";
  throw Error(ErrorCode::NoConvergence, os.str());
}

SymmetricSpectrum symmetric_spectrum(const Matrix& mat) {
  require_symmetric(mat);
  const std::size_t n = mat.rows();
  Matrix a = symmetric_part(mat);
  Matrix q = Matrix::identity(n);

  auto off_mass = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) total += a(i, j) * a(i, j);
  const double target = 1e-14 * std::sqrt(total);

  for (int sweep = 0; sweep < 100 && off_mass() > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t k = p + 1; k < n; ++k) {
        const double apq = a(p, k);
        if (apq == 0.0) continue;
        const double theta = (a(k, k) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aik = a(i, k);
          a(i, p) = c * aip - s * aik;
          a(i, k) = s * aip + c * aik;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j);
          const double akj = a(k, j);
          a(p, j) = c * apj - s * akj;
          a(k, j) = s * apj + c * akj;
        }
        a(p, k) = 0.0;
        a(k, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double qip = q(i, p);
          const double qik = q(i, k);
          q(i, p) = c * qip - s * qik;
          q(i, k) = s * qip + c * qik;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  SymmetricSpectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = q(i, order[k]);
  }
  return out;
}

Vector solve_linear(const Matrix& mat, std::span<const double> b) {
  require_square(mat, "solve_linear");
  const std::size_t n = mat.rows();
  if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "right-hand side has the wrong length");
  const double floor = 1e-14 * norm_inf(mat);

  Matrix a = mat;
  Vector x(b.begin(), b.end());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
    if (!(std::abs(a(piv, col)) > floor) || std::abs(a(piv, col)) == 0.0)
      throw Error(ErrorCode::SingularMatrix, "pivot below 1e-14 * ||A||_inf");
    if (piv != col) {
      std::swap_ranges(a.row(col).begin(), a.row(col).end(), a.row(piv).begin());
      std::swap(x[col], x[piv]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      x[i] -= f * x[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

SymmetricExponential::SymmetricExponential(const Matrix& sym) : spectrum_(symmetric_spectrum(sym)) {}

Vector SymmetricExponential::apply(double t, std::span<const double> v) const {
  const Matrix& q = spectrum_.eigenvectors;
  const std::size_t n = q.rows();
  if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, "vector has the wrong length");
  if (t == 0.0) return Vector(v.begin(), v.end());
  Vector coef(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += q(i, k) * v[i];
    coef[k] = s * std::exp(spectrum_.eigenvalues[k] * t);
  }
  Vector out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += q(i, k) * coef[k];
    out[i] = s;
  }
  return out;
}

Vector expm_action(const Matrix& sym, double t, std::span<const double> v0) {
  return SymmetricExponential(sym).apply(t, v0);
}

bool is_positive_definite(const Matrix& sym) {
  const SymmetricSpectrum s = symmetric_spectrum(sym);
  return s.eigenvalues.back() > 0.0;
}

}  // namespace lvmut
