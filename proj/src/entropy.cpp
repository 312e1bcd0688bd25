#include "lvmut/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvmut/errors.hpp"
#include "lvmut/equilibrium.hpp"

namespace lvmut {
namespace {

void check_reference(std::span<const double> v, std::span<const double> v_bar) {
  if (v.size() != v_bar.size()) throw Error(ErrorCode::DimensionMismatch, "state and reference differ in length");
  for (double x : v_bar)
    if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveReference, "reference state must be strictly positive");
}

void require_symmetric_mu(const Model& model) {
  if (!model.mu_is_symmetric()) throw Error(ErrorCode::AsymmetricMutation, "entropy identities need symmetric mu");
}

double parse_double(std::string_view s) {
  std::string buf(s);
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(buf, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != buf.size() || !std::isfinite(x))
    throw Error(ErrorCode::KernelMismatch, "bad polynomial coefficient '" + buf + "'");
  return x;
}

}  // namespace

double kernel_value(const EntropyKernel& kernel, double s) {
  if (std::holds_alternative<LinearKernel>(kernel)) return s;
  if (std::holds_alternative<QuadraticKernel>(kernel)) return s * s;
  const Vector& c = std::get<PolynomialKernel>(kernel).coeffs;
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double kernel_derivative(const EntropyKernel& kernel, double s) {
  if (std::holds_alternative<LinearKernel>(kernel)) return 1.0;
  if (std::holds_alternative<QuadraticKernel>(kernel)) return 2.0 * s;
  const Vector& c = std::get<PolynomialKernel>(kernel).coeffs;
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * c[k];
  return acc;
}

EntropyKernel parse_kernel(std::string_view text) {
  if (text == "linear") return LinearKernel{};
  if (text == "quadratic") return QuadraticKernel{};
  constexpr std::string_view prefix = "poly:";
  if (text.substr(0, prefix.size()) == prefix) {
    PolynomialKernel p;
    std::string_view rest = text.substr(prefix.size());
    while (true) {
      const auto comma = rest.find(',');
      p.coeffs.push_back(parse_double(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return p;
  }
  throw Error(ErrorCode::KernelMismatch, "unknown kernel '" + std::string(text) + "'");
}

std::string kernel_name(const EntropyKernel& kernel) {
  if (std::holds_alternative<LinearKernel>(kernel)) return "linear";
  if (std::holds_alternative<QuadraticKernel>(kernel)) return "quadratic";
  std::ostringstream os;
  os.precision(17);
  os << "poly:";
  const Vector& c = std::get<PolynomialKernel>(kernel).coeffs;
  for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
  return os.str();
}

double entropy_value(std::span<const double> v, std::span<const double> v_bar, const EntropyKernel& kernel) {
  check_reference(v, v_bar);
  double h = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) h += v_bar[i] * v_bar[i] * kernel_value(kernel, v[i] / v_bar[i]);
  return h;
}

bool is_stationary_reference(const Model& model, std::span<const double> v_bar) {
  return residual(model, v_bar) <= 1e-8 * std::max(1.0, norm_inf(v_bar));
}

EntropyReport dissipation(const Model& model, std::span<const double> v, std::span<const double> v_bar,
                          const EntropyKernel& kernel) {
  require_symmetric_mu(model);
  check_reference(v, v_bar);
  if (v.size() != model.n) throw Error(ErrorCode::DimensionMismatch, "state has the wrong length");
  if (!is_stationary_reference(model, v_bar))
    throw Error(ErrorCode::NotStationaryReference, "reference state is not stationary (residual above 1e-8)");

  const std::size_t n = model.n;
  Vector x(n), hx(n), dhx(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = v[i] / v_bar[i];
    hx[i] = kernel_value(kernel, x[i]);
    dhx[i] = kernel_derivative(kernel, x[i]);
  }

  EntropyReport rep;
  rep.h_value = entropy_value(v, v_bar, kernel);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double w = model.mu(i, j) * v_bar[i] * v_bar[j];
      if (w == 0.0) continue;
      d += w * (hx[j] - hx[i]) + w * dhx[i] * (x[i] - x[j]);
    }
  rep.d_value = d;

  const Vector psi_bar = interaction_values(model, v_bar);
  const Vector psi = interaction_values(model, v);
  double g = 0.0;
  for (std::size_t i = 0; i < n; ++i) g += v_bar[i] * dhx[i] * (psi_bar[i] - psi[i]) * v[i];
  rep.gamma_term = g / model.big_k;
  rep.analytic_dt = -rep.d_value + rep.gamma_term;
  return rep;
}

double identity_residual(const Model& model, const Trajectory& trajectory, std::span<const double> v_bar,
                         const EntropyKernel& kernel) {
  const std::size_t m = trajectory.size();
  if (m < 100) throw Error(ErrorCode::TooFewSamples, "identity_residual needs at least 100 recorded states");
  Vector h(m);
  for (std::size_t k = 0; k < m; ++k) h[k] = entropy_value(trajectory.states[k], v_bar, kernel);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double fd = (h[k + 1] - h[k - 1]) / (trajectory.times[k + 1] - trajectory.times[k - 1]);
    const double analytic = dissipation(model, trajectory.states[k], v_bar, kernel).analytic_dt;
    worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(h[k])));
  }
  return worst;
}

Decomposition decompose(std::span<const double> v, std::span<const double> v_bar) {
  if (v.size() != v_bar.size()) throw Error(ErrorCode::DimensionMismatch, "state and reference differ in length");
  const double ref = dot(v_bar, v_bar);
  if (!(ref > 0.0)) throw Error(ErrorCode::ZeroReference, "reference state is zero");
  Decomposition d;
  d.beta = dot(v, v_bar);
  d.lambda_coef = d.beta / ref;
  d.h = axpy(-d.lambda_coef, v_bar, v);
  d.e_h = dot(d.h, d.h);
  d.e_v = dot(v, v);
  d.f_value = d.beta == 0.0 ? std::numeric_limits<double>::infinity() : std::log(d.e_v / (d.beta * d.beta));
  return d;
}

double dirichlet_form(const Model& model, std::span<const double> v, std::span<const double> v_bar) {
  check_reference(v, v_bar);
  double q = 0.0;
  for (std::size_t i = 0; i < model.n; ++i)
    for (std::size_t j = 0; j < model.n; ++j) {
      const double diff = v[j] / v_bar[j] - v[i] / v_bar[i];
      q += model.mu(i, j) * v_bar[i] * v_bar[j] * diff * diff;
    }
  return q;
}

LyapunovSeries lyapunov_descent(const Model& model, const Trajectory& trajectory, std::span<const double> v_bar) {
  if (!model.is_uniform())
    throw Error(ErrorCode::WrongInteractionKind, "the Lyapunov functional applies to shared competition only");
  require_symmetric_mu(model);
  LyapunovSeries out;
  out.times = trajectory.times;
  out.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const Vector& v = trajectory.states[k];
    const Decomposition d = decompose(v, v_bar);
    out.f.push_back(d.f_value);
    out.df_dt.push_back(d.e_v > 0.0 ? -dirichlet_form(model, v, v_bar) / d.e_v : 0.0);
    if (k > 0) out.max_increase = std::max(out.max_increase, out.f[k] - out.f[k - 1]);
  }
  if (trajectory.size() < 2) out.max_increase = 0.0;
  return out;
}

std::vector<DiagnosticsRow> entropy_diagnostics(const Model& model, const Trajectory& trajectory,
                                                std::span<const double> v_bar, const EntropyKernel& kernel) {
  std::vector<DiagnosticsRow> rows;
  rows.reserve(trajectory.size());
  for (std::size_t k = 0; k < trajectory.size(); ++k)
    rows.push_back({trajectory.times[k], dissipation(model, trajectory.states[k], v_bar, kernel),
                    decompose(trajectory.states[k], v_bar)});
  return rows;
}

}  // namespace lvmut
