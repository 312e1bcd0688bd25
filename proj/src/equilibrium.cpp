#include "lvmut/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvmut/errors.hpp"

namespace lvmut {
namespace {

std::string s_label(double s) {
  std::ostringstream os;
  os << "s = " << s;
  return os.str();
}

// Psi^s_i(v) = s Psi_i(v) + (1 - s) Psi_1(v)
Vector homotopy_values(const Model& model, double s, std::span<const double> v) {
  Vector psi = interaction_values(model, v);
  const double anchor = psi[0];
  for (double& p : psi) p = s * p + (1.0 - s) * anchor;
  return psi;
}

Matrix homotopy_gradient(const Model& model, double s, std::span<const double> v) {
  Matrix g = interaction_gradient(model, v);
  const Vector anchor(g.row(0).begin(), g.row(0).end());
  for (std::size_t i = 0; i < model.n; ++i)
    for (std::size_t j = 0; j < model.n; ++j) g(i, j) = s * g(i, j) + (1.0 - s) * anchor[j];
  return g;
}

// (R+M)v - Xi^s(v) v / K
Vector homotopy_residual_vec(const Model& model, const Matrix& a, double s, std::span<const double> v) {
  Vector g = a * v;
  const Vector psi = homotopy_values(model, s, v);
  for (std::size_t i = 0; i < model.n; ++i) g[i] -= psi[i] * v[i] / model.big_k;
  return g;
}

// Coefficient bounds c N - sigma <= Psi_i(v) <= kappa N + sigma for v >= 0.
struct FamilyBounds {
  double c = 0.0;
  double kappa = 0.0;
  double sigma = 0.0;
};

FamilyBounds family_bounds(const Model& model) {
  FamilyBounds b;
  if (const auto* u = std::get_if<UniformLinear>(&model.interaction)) {
    b.c = *std::min_element(u->a.begin(), u->a.end());
    b.kappa = *std::max_element(u->a.begin(), u->a.end());
  } else if (const auto* cr = std::get_if<CrowdingLinear>(&model.interaction)) {
    b.c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.n; ++i)
      for (std::size_t j = 0; j < model.n; ++j) {
        const double coef = cr->alpha(i, j) * model.r[j];
        b.c = std::min(b.c, coef);
        b.kappa = std::max(b.kappa, coef);
      }
  } else {
    const auto& p = std::get<Perturbed>(model.interaction);
    b.c = *std::min_element(p.base.a.begin(), p.base.a.end());
    b.kappa = *std::max_element(p.base.a.begin(), p.base.a.end());
    b.sigma = p.eps * norm_inf(p.amp);
  }
  return b;
}

// Largest t with Psi_1(t v_p) = target, for the s = 0 anchor problem.
double scale_along_ray(const Model& model, std::span<const double> v_p, double target) {
  auto f = [&](double t) { return interaction_values(model, scaled(t, v_p))[0] - target; };
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 2000 && f(hi) < 0.0; ++k) hi *= 2.0;
  if (f(hi) < 0.0) throw Error(ErrorCode::InnerNoConvergence, "s = 0: anchor scaling has no root");
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct NewtonOutcome {
  Vector v;
  double residual = 0.0;
  std::size_t iterations = 0;
};

// Newton on G(v) = (R+M)v - Xi^s(v) v / K with
// J = (R+M) - (diag Psi^s + diag(v) grad Psi^s) / K.
NewtonOutcome newton_polish(const Model& model, const Matrix& a, double s, Vector v, std::size_t max_iter) {
  const std::size_t n = model.n;
  NewtonOutcome best{v, norm_inf(homotopy_residual_vec(model, a, s, v)), 0};
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Vector g = homotopy_residual_vec(model, a, s, v);
    const Vector psi = homotopy_values(model, s, v);
    const Matrix grad = homotopy_gradient(model, s, v);
    Matrix jac = a;
    for (std::size_t i = 0; i < n; ++i) {
      jac(i, i) -= psi[i] / model.big_k;
      for (std::size_t j = 0; j < n; ++j) jac(i, j) -= v[i] * grad(i, j) / model.big_k;
    }
    Vector dv;
    try {
      dv = solve_linear(jac, g);
    } catch (const Error&) {
      break;
    }
    Vector next = subtract(v, dv);
    if (*std::min_element(next.begin(), next.end()) <= 0.0) break;
    const double res = norm_inf(homotopy_residual_vec(model, a, s, next));
    v = std::move(next);
    if (res < best.residual) best = {v, res, it};
    if (norm_inf(dv) <= 4.0 * std::numeric_limits<double>::epsilon() * norm_inf(v)) break;
  }
  return best;
}

}  // namespace

std::string to_string(EquilibriumMethod method) {
  return method == EquilibriumMethod::PerronScaling ? "PerronScaling" : "Homotopy";
}

double residual(const Model& model, std::span<const double> v) { return norm_inf(rhs(model, v)); }

PerronResult model_perron(const Model& model) {
  PerronOptions opts;
  opts.shift = mutation_shift(model);
  return perron_eigenpair(growth_mutation_matrix(model), opts);
}

HomotopyConfig default_homotopy_config(const Model& model) {
  HomotopyConfig cfg;
  const SymmetricSpectrum spec = symmetric_spectrum(symmetric_part(growth_mutation_matrix(model)));
  const double lam_max = spec.eigenvalues.front();
  const double lam_min = spec.eigenvalues.back();
  const FamilyBounds b = family_bounds(model);
  const double lower = (model.big_k * lam_min - b.sigma) / b.kappa;
  const double upper = (model.big_k * lam_max + b.sigma) / b.c;
  if (lam_min > 0.0 && b.c > 0.0 && b.kappa > 0.0 && lower > 0.0 && std::isfinite(upper)) {
    cfg.box_lo = 0.5 * lower;
    cfg.box_hi = 2.0 * upper;
  } else {
    cfg.box_lo = 1e-6 * model.big_k;
    cfg.box_hi = 1e3 * model.big_k;
    cfg.box_is_fallback = true;
  }
  return cfg;
}

EquilibriumResult equilibrium_uniform(const Model& model) {
  const auto* u = std::get_if<UniformLinear>(&model.interaction);
  if (u == nullptr) throw Error(ErrorCode::WrongInteractionKind, "Perron scaling needs uniform linear competition");
  const PerronResult p = model_perron(model);
  if (!(p.lambda_p > 0.0)) throw Error(ErrorCode::NonPositivePerron, "Perron eigenvalue of R+M is not positive");
  const double denom = dot(u->a, p.v_p);
  if (!(denom > 0.0)) throw Error(ErrorCode::NonPositivePerron, "a . v_p is not positive");

  EquilibriumResult res;
  res.lambda_p = p.lambda_p;
  res.nu_p = p.nu_p;
  res.v_p = p.v_p;
  res.alpha_bar = model.big_k * p.lambda_p;
  res.v_bar = scaled(res.alpha_bar / denom, p.v_p);
  res.residual = residual(model, res.v_bar);
  res.method = EquilibriumMethod::PerronScaling;
  return res;
}

EquilibriumResult equilibrium_homotopy(const Model& model) {
  return equilibrium_homotopy(model, default_homotopy_config(model));
}

EquilibriumResult equilibrium_homotopy(const Model& model, const HomotopyConfig& config) {
  const HypothesisReport rep = validate(model);
  const bool admissible = rep.h3_half || (!rep.h1_symmetry && rep.h4_third);
  if (!admissible) throw Error(ErrorCode::Hypothesis3Violated, "mutation rates exceed r_i / 2 in some row");
  if (config.s_steps < 2) throw Error(ErrorCode::DimensionMismatch, "s_steps must be at least 2");
  if (!(config.box_lo > 0.0) || !(config.box_lo < config.box_hi))
    throw Error(ErrorCode::DimensionMismatch, "a-priori box must satisfy 0 < box_lo < box_hi");

  const std::size_t n = model.n;
  const Matrix a = growth_mutation_matrix(model);
  const double big_k = model.big_k;

  EquilibriumResult res;
  res.method = EquilibriumMethod::Homotopy;
  res.box_lo = config.box_lo;
  res.box_hi = config.box_hi;
  if (config.box_is_fallback)
    res.warnings.push_back("a-priori box could not be derived; using fallback [1e-6 K, 1e3 K]");

  const PerronResult p = model_perron(model);
  if (!(p.lambda_p > 0.0)) throw Error(ErrorCode::NonPositivePerron, "Perron eigenvalue of R+M is not positive");
  res.lambda_p = p.lambda_p;
  res.nu_p = p.nu_p;
  res.v_p = p.v_p;
  res.alpha_bar = big_k * p.lambda_p;

  auto in_box = [&](std::span<const double> v) {
    const double m = sum(v);
    return m >= config.box_lo && m <= config.box_hi &&
           std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
  };
  auto checkpoint = [&](double s, const Vector& v, std::size_t iters) {
    res.path.push_back({s, v, norm_inf(homotopy_residual_vec(model, a, s, v)), sum(v), iters});
  };

  Vector v = scaled(scale_along_ray(model, p.v_p, res.alpha_bar), p.v_p);
  if (!in_box(v)) throw Error(ErrorCode::LeftAprioriBox, s_label(0.0) + ": anchor solution lies outside the box");
  checkpoint(0.0, v, 0);

  for (std::size_t k = 1; k < config.s_steps; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(config.s_steps - 1);
    double damping = config.damping;
    bool converged = false;
    std::size_t it = 0;
    for (; it < config.max_inner; ++it) {
      const Vector psi = homotopy_values(model, s, v);
      Vector xi_v(n);
      for (std::size_t i = 0; i < n; ++i) xi_v[i] = psi[i] * v[i] / big_k;
      const Vector tv = solve_linear(a, xi_v);
      if (norm_inf(subtract(tv, v)) <= config.inner_tol * std::max(1.0, norm_inf(v))) {
        converged = true;
        break;
      }
      // S(v)_i = K ((R+M) v)_i / Psi^s_i(v) shares the positive fixed points of T.
      const Vector av = a * v;
      Vector sv(n);
      for (std::size_t i = 0; i < n; ++i) sv[i] = big_k * av[i] / psi[i];
      Vector next(n);
      bool accepted = false;
      while (damping >= 1e-8) {
        for (std::size_t i = 0; i < n; ++i) next[i] = (1.0 - damping) * v[i] + damping * sv[i];
        if (std::all_of(next.begin(), next.end(), [](double x) { return std::isfinite(x); }) && in_box(next)) {
          accepted = true;
          break;
        }
        damping *= 0.5;
      }
      if (!accepted) throw Error(ErrorCode::LeftAprioriBox, s_label(s) + ": iterate left the a-priori box");
      v = std::move(next);
    }
    if (!converged) {
      NewtonOutcome rescue = newton_polish(model, a, s, v, config.newton_max);
      const Vector psi = homotopy_values(model, s, rescue.v);
      Vector xi_v(n);
      for (std::size_t i = 0; i < n; ++i) xi_v[i] = psi[i] * rescue.v[i] / big_k;
      const Vector tv = solve_linear(a, xi_v);
      if (norm_inf(subtract(tv, rescue.v)) > config.inner_tol * std::max(1.0, norm_inf(rescue.v)))
        throw Error(ErrorCode::InnerNoConvergence, s_label(s) + ": fixed-point iteration did not converge");
      if (!in_box(rescue.v)) throw Error(ErrorCode::LeftAprioriBox, s_label(s) + ": Newton rescue left the box");
      v = std::move(rescue.v);
      res.warnings.push_back(s_label(s) + ": damped iteration stalled, converged by Newton");
    }
    checkpoint(s, v, it);
  }

  NewtonOutcome polished = newton_polish(model, a, 1.0, v, config.newton_max);
  if (in_box(polished.v)) {
    v = std::move(polished.v);
    res.newton_iterations = polished.iterations;
  }
  if (*std::min_element(v.begin(), v.end()) <= 0.0)
    throw Error(ErrorCode::InnerNoConvergence, "s = 1: solution is not strictly positive");
  res.v_bar = v;
  res.residual = residual(model, v);
  return res;
}

EquilibriumResult equilibrium_auto(const Model& model) {
  return model.is_uniform() ? equilibrium_uniform(model) : equilibrium_homotopy(model);
}

}  // namespace lvmut
