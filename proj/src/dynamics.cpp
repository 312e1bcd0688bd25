#include "lvmut/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "lvmut/errors.hpp"

namespace lvmut {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vector record_grid(double t_end, double record_every) {
  const double h = record_every > 0.0 ? record_every : t_end / 500.0;
  auto m = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  m = std::max<std::size_t>(m, 1);
  Vector grid(m + 1);
  for (std::size_t k = 0; k <= m; ++k) grid[k] = t_end * static_cast<double>(k) / static_cast<double>(m);
  grid.back() = t_end;
  return grid;
}

constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                            0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                              0.1012285362903763};

double gl8(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < kGlNodes.size(); ++k)
    s += kGlWeights[k] * (f(mid - half * kGlNodes[k]) + f(mid + half * kGlNodes[k]));
  return s * half;
}

double gl_recurse(const std::function<double(double)>& f, double a, double b, double whole, double rel_tol,
                  int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl8(f, a, m);
  const double right = gl8(f, m, b);
  const double both = left + right;
  if (depth <= 0 || std::abs(both - whole) <= rel_tol * std::max(1.0, std::abs(both))) return both;
  return gl_recurse(f, a, m, left, rel_tol, depth - 1) + gl_recurse(f, m, b, right, rel_tol, depth - 1);
}

}  // namespace

double gauss_legendre_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                               int max_depth) {
  if (a == b) return 0.0;
  return gl_recurse(f, a, b, gl8(f, a, b), rel_tol, max_depth);
}

Trajectory integrate(const Model& model, std::span<const double> v0, double t_end, const IntegrateOptions& options) {
  const std::size_t n = model.n;
  if (v0.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial condition has the wrong length");
  if (!all_finite(v0)) throw Error(ErrorCode::NonFiniteInput, "initial condition is not finite");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorCode::NonFiniteInput, "t_end must be positive");
  for (double x : v0)
    if (x < 0.0) throw Error(ErrorCode::NonFiniteInput, "initial condition must be nonnegative");

  Trajectory traj;
  traj.rtol = options.rtol;
  traj.atol = options.atol;
  const Vector grid = record_grid(t_end, options.record_every);
  traj.times.reserve(grid.size());
  traj.states.reserve(grid.size());

  Vector y(v0.begin(), v0.end());
  traj.times.push_back(0.0);
  traj.states.push_back(y);

  if (std::all_of(y.begin(), y.end(), [](double x) { return x == 0.0; })) {
    traj.zero_initial = true;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      traj.times.push_back(grid[k]);
      traj.states.push_back(y);
    }
    return traj;
  }

  const double rtol = options.rtol;
  const double atol = options.atol;
  auto weight = [&](double a, double b) { return atol + rtol * std::max(std::abs(a), std::abs(b)); };

  Vector k1 = rhs(model, y);
  // Initial step from the local scale of the solution and its derivative.
  double h;
  {
    double d0 = 0.0;
    double d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weight(y[i], y[i]);
      d0 += (y[i] / w) * (y[i] / w);
      d1 += (k1[i] / w) * (k1[i] / w);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, grid[1] - grid[0], t_end});
  }

  const double h_min = 1e-14 * t_end;
  double err_prev = 1e-4;
  double t = 0.0;
  std::size_t next = 1;
  Vector tmp(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_new(n);
  bool last_rejected = false;
  bool last_nonfinite = false;
  std::size_t steps = 0;

  while (next < grid.size()) {
    if (++steps > options.max_steps) throw Error(ErrorCode::StepSizeUnderflow, "step budget exhausted");
    if (h < h_min) {
      std::ostringstream os;
      os << "step size " << h << " fell below 1e-14 * t_end at t = " << t;
      throw Error(last_nonfinite ? ErrorCode::NonFiniteState : ErrorCode::StepSizeUnderflow, os.str());
    }
    const double target = grid[next];
    const bool lands = h >= target - t;
    const double step = lands ? target - t : h;

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * a21 * k1[i];
    k2 = rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i)
      y_new[i] = y[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = rhs(model, y_new);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e =
          step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double s = e / weight(y[i], y_new[i]);
      err += s * s;
    }
    err = std::sqrt(err / n);

    if (!std::isfinite(err) || !all_finite(y_new)) {
      last_nonfinite = true;
      ++traj.rejected_steps;
      h = 0.5 * step;
      last_rejected = true;
      continue;
    }
    last_nonfinite = false;

    if (err > 1.0) {
      ++traj.rejected_steps;
      h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
      continue;
    }

    bool negative = false;
    bool clamped = false;
    for (double& x : y_new) {
      if (x < -atol) {
        negative = true;
        break;
      }
      if (x < 0.0) {
        x = 0.0;
        clamped = true;
      }
    }
    if (negative) {
      ++traj.rejected_steps;
      h = 0.5 * step;
      last_rejected = true;
      continue;
    }

    ++traj.accepted_steps;
    t = lands ? target : t + step;
    y = y_new;
    k1 = clamped ? rhs(model, y) : k7;

    // PI controller; no growth directly after a rejection.
    const double e = std::max(err, 1e-10);
    double factor = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
    factor = std::clamp(factor, 0.2, 5.0);
    if (last_rejected) factor = std::min(factor, 1.0);
    err_prev = e;
    last_rejected = false;
    // A step shortened to land on the grid does not shrink the next one.
    h = (lands && step < h) ? std::max(h, step * factor) : step * factor;

    if (lands) {
      traj.times.push_back(t);
      traj.states.push_back(y);
      ++next;
    }
  }
  return traj;
}

Trajectory closed_form_uniform_linear(const Model& model, std::span<const double> v0,
                                      std::span<const double> times) {
  const auto* u = std::get_if<UniformLinear>(&model.interaction);
  if (u == nullptr) throw Error(ErrorCode::WrongInteractionKind, "closed form needs uniform linear competition");
  if (v0.size() != model.n) throw Error(ErrorCode::DimensionMismatch, "initial condition has the wrong length");

  const SymmetricExponential expo(growth_mutation_matrix(model));
  const Vector weights = scaled(1.0 / model.big_k, u->a);
  const std::function<double(double)> integrand = [&](double s) { return dot(weights, expo.apply(s, v0)); };

  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());
  double integral = 0.0;
  double prev = 0.0;
  for (double t : times) {
    if (t < prev) throw Error(ErrorCode::DimensionMismatch, "times must be nondecreasing from 0");
    integral += gauss_legendre_adaptive(integrand, prev, t);
    prev = t;
    traj.states.push_back(scaled(1.0 / (1.0 + integral), expo.apply(t, v0)));
  }
  traj.zero_initial = std::all_of(v0.begin(), v0.end(), [](double x) { return x == 0.0; });
  return traj;
}

double logistic_solution(double xi, double big_k, double n0, double t) {
  const double decay = std::exp(-xi * t);
  return big_k * n0 / (big_k * decay + n0 * (1.0 - decay));
}

EnvelopePair logistic_envelopes(const Model& model, double n0, std::span<const double> times) {
  if (!model.is_fitness_weighted())
    throw Error(ErrorCode::WrongInteractionKind, "envelopes need fitness-weighted competition (a = r)");
  if (!(n0 > 0.0)) throw Error(ErrorCode::ZeroInitialMass, "initial total population must be positive");
  EnvelopePair env;
  env.xi_minus = *std::min_element(model.r.begin(), model.r.end());
  env.xi_plus = *std::max_element(model.r.begin(), model.r.end());
  env.times.assign(times.begin(), times.end());
  for (double t : times) {
    env.n_min.push_back(logistic_solution(env.xi_minus, model.big_k, n0, t));
    env.n_max.push_back(logistic_solution(env.xi_plus, model.big_k, n0, t));
  }
  return env;
}

double positivity_floor(const Model& model, std::span<const double> v0) {
  const double mass = sum(v0);
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroInitialMass, "initial population is identically zero");
  const double r_min = *std::min_element(model.r.begin(), model.r.end());
  const double kappa0 = coercivity_params(model).kappa0();
  return std::min({1.0, mass / 2.0, r_min / (2.0 * kappa0)});
}

Vector perron_growth_ceiling(const PerronResult& perron, std::span<const double> v0, double t) {
  const double vmin = *std::min_element(perron.v_p.begin(), perron.v_p.end());
  return scaled(std::exp(perron.lambda_p * t) * norm_inf(v0) / vmin, perron.v_p);
}

}  // namespace lvmut
