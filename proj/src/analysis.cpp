#include "lvmut/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "lvmut/entropy.hpp"
#include "lvmut/errors.hpp"

namespace lvmut {
namespace {

// Runs body(k) for k in [0, count) on a small pool; each call owns slot k of
// whatever the caller writes to, so the merged result is schedule-independent.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double unit_interval(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace

SpectralGapReport spectral_gap(const Model& model, std::span<const double> v_bar) {
  if (!model.mu_is_symmetric()) throw Error(ErrorCode::AsymmetricMutation, "spectral gap needs symmetric mu");
  if (v_bar.size() != model.n) throw Error(ErrorCode::DimensionMismatch, "reference has the wrong length");
  for (double x : v_bar)
    if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveReference, "reference state must be strictly positive");

  const std::size_t n = model.n;
  SpectralGapReport rep;
  rep.d_matrix = Matrix(n, n);
  rep.m_tilde = model.mu;
  for (std::size_t i = 0; i < n; ++i) {
    rep.m_tilde(i, i) = 0.0;
    rep.d_matrix(i, i) = dot(model.mu.row(i), v_bar) / v_bar[i];
  }
  // Symmetrize away roundoff so the Jacobi solver sees an exactly symmetric matrix.
  const Matrix op = symmetric_part(rep.d_matrix - rep.m_tilde);
  const SymmetricSpectrum spec = symmetric_spectrum(op);

  rep.eigenvalues.assign(spec.eigenvalues.rbegin(), spec.eigenvalues.rend());
  rep.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) rep.eigenvectors(i, k) = spec.eigenvectors(i, n - 1 - k);

  auto column = [&](std::size_t k) {
    Vector c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = rep.eigenvectors(i, k);
    if (sum(c) < 0.0)
      for (double& x : c) x = -x;
    return c;
  };
  rep.kernel_vector = column(0);
  rep.c1 = n > 1 ? rep.eigenvalues[1] : 0.0;
  if (n > 1) rep.c1_vector = column(1);

  Vector ref(v_bar.begin(), v_bar.end());
  const double ref_norm = norm_l2(ref);
  for (double& x : ref) x /= ref_norm;
  if (norm_inf(subtract(rep.kernel_vector, ref)) > 1e-8) {
    std::ostringstream os;
    os << "null vector of D - Mtilde is not proportional to vbar (deviation "
       << norm_inf(subtract(rep.kernel_vector, ref)) << ")";
    throw Error(ErrorCode::KernelMismatch, os.str());
  }
  return rep;
}

Vector project_orthogonal(std::span<const double> h, std::span<const double> v_bar) {
  const double coef = dot(h, v_bar) / dot(v_bar, v_bar);
  return axpy(-coef, v_bar, h);
}

double rayleigh_quotient(const Model& model, std::span<const double> h, std::span<const double> v_bar) {
  return dirichlet_form(model, h, v_bar) / dot(h, h);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double m = static_cast<double>(x.size());
  const double mx = sum(x) / m;
  const double my = sum(y) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - (fit.intercept + fit.slope * x[k]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

RateReport convergence_rate(const Trajectory& trajectory, std::span<const double> v_bar, double tail_fraction,
                            double predicted_c1) {
  if (trajectory.size() == 0) throw Error(ErrorCode::InsufficientTail, "empty trajectory");
  const double t0 = trajectory.times.front();
  const double t1 = trajectory.times.back();
  const double start = t1 - std::clamp(tail_fraction, 0.0, 1.0) * (t1 - t0);

  Vector ts, log_eh, ts_sup, log_sup;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    if (trajectory.times[k] < start) continue;
    const Decomposition d = decompose(trajectory.states[k], v_bar);
    if (!(d.e_h > 1e-28)) continue;
    ts.push_back(trajectory.times[k]);
    log_eh.push_back(std::log(d.e_h));
    const double sup = norm_inf(subtract(trajectory.states[k], v_bar));
    if (sup > 0.0) {
      ts_sup.push_back(trajectory.times[k]);
      log_sup.push_back(std::log(sup));
    }
  }
  if (ts.size() < 20) {
    std::ostringstream os;
    os << "tail window holds " << ts.size() << " usable points, need 20";
    throw Error(ErrorCode::InsufficientTail, os.str());
  }
  RateReport rep;
  const LineFit eh = least_squares(ts, log_eh);
  rep.fitted_rate_eh = eh.slope;
  rep.r_squared = eh.r_squared;
  if (ts_sup.size() >= 2) {
    const LineFit sup = least_squares(ts_sup, log_sup);
    rep.fitted_rate_sup = sup.slope;
    rep.r_squared_sup = sup.r_squared;
  }
  rep.predicted_c1 = predicted_c1;
  rep.t_start = ts.front();
  rep.t_end = ts.back();
  rep.points = ts.size();
  return rep;
}

std::vector<Vector> sample_initial_conditions(std::size_t n, std::size_t count, std::uint64_t seed, double low,
                                              double high) {
  std::mt19937_64 gen(seed);
  std::vector<Vector> out;
  out.reserve(count);
  while (out.size() < count) {
    Vector v(n);
    for (double& x : v) x = low + (high - low) * unit_interval(gen);
    if (std::any_of(v.begin(), v.end(), [](double x) { return x > 0.0; })) out.push_back(std::move(v));
  }
  return out;
}

bool stability_in_scope(const Model& model, std::string* note) {
  auto say = [&](const std::string& s) {
    if (note) *note = s;
  };
  const HypothesisReport rep = validate(model);
  if (!rep.h1_to_h3()) {
    say("hypotheses H1-H3 do not all hold");
    return false;
  }
  if (model.is_uniform()) {
    say(model.is_fitness_weighted() ? "fitness-weighted shared competition" : "shared linear competition");
    return true;
  }
  if (std::holds_alternative<Perturbed>(model.interaction)) {
    say("perturbed shared competition satisfying the monotone sufficient condition");
    return true;
  }
  const auto& c = std::get<CrowdingLinear>(model.interaction);
  for (std::size_t i = 1; i < model.n; ++i)
    for (std::size_t j = 0; j < model.n; ++j)
      if (std::abs(c.alpha(i, j) - c.alpha(0, j)) > 1e-12 * std::max(1.0, std::abs(c.alpha(0, j)))) {
        say("crowding index varies between genotypes");
        return false;
      }
  say("crowding index identical across genotypes (shared competition)");
  return true;
}

StabilityReport global_stability_experiment(const Model& model, const StabilityOptions& options) {
  StabilityReport rep;
  rep.in_scope = stability_in_scope(model, &rep.scope_note);
  if (!rep.in_scope && !options.force)
    throw Error(ErrorCode::OutOfTheoremScope, "outside theorem scope: " + rep.scope_note + " (use --force)");

  std::vector<Vector> starts = options.initial;
  if (starts.empty()) {
    if (options.n_samples == 0) throw Error(ErrorCode::TooFewSamples, "n_samples must be positive");
    const double high = options.high < 0.0 ? 2.0 * model.big_k : options.high;
    starts = sample_initial_conditions(model.n, options.n_samples, options.seed, options.low, high);
  }

  rep.attractor = equilibrium_auto(model).v_bar;
  rep.samples.resize(starts.size());
  parallel_for(starts.size(), options.threads, [&](std::size_t k) {
    StabilitySample& s = rep.samples[k];
    s.v0 = starts[k];
    s.excluded_zero = std::all_of(s.v0.begin(), s.v0.end(), [](double x) { return x == 0.0; });
    const Trajectory traj = integrate(model, s.v0, options.t_end, options.integrate);
    s.v_end = traj.states.back();
    s.gap_to_equilibrium = norm_inf(subtract(s.v_end, rep.attractor));
  });

  std::vector<const StabilitySample*> kept;
  for (const auto& s : rep.samples) {
    if (s.excluded_zero) {
      ++rep.excluded;
      continue;
    }
    kept.push_back(&s);
    rep.max_gap_to_equilibrium = std::max(rep.max_gap_to_equilibrium, s.gap_to_equilibrium);
  }
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t b = a + 1; b < kept.size(); ++b)
      rep.max_pairwise_gap = std::max(rep.max_pairwise_gap, norm_inf(subtract(kept[a]->v_end, kept[b]->v_end)));
  rep.converged = rep.max_pairwise_gap <= options.tol && rep.max_gap_to_equilibrium <= options.tol;
  return rep;
}

Model perturbed_model(const Model& base, const PerturbationSpec& perturbation, double eps) {
  const auto* u = std::get_if<UniformLinear>(&base.interaction);
  if (u == nullptr) throw Error(ErrorCode::WrongInteractionKind, "perturbation needs a shared linear base model");
  return build_model(base.n, base.r, base.big_k, base.mu, Perturbed{*u, eps, perturbation.amp, perturbation.w});
}

PerturbationTable perturbation_sweep(const Model& base, const PerturbationSpec& perturbation,
                                     std::span<const double> eps_grid, unsigned threads) {
  if (!base.is_uniform()) throw Error(ErrorCode::WrongInteractionKind, "sweep needs a shared linear base model");
  for (std::size_t k = 0; k < eps_grid.size(); ++k)
    if (!(eps_grid[k] > 0.0) || (k > 0 && !(eps_grid[k] > eps_grid[k - 1])))
      throw Error(ErrorCode::DimensionMismatch, "eps grid must be positive and strictly ascending");
  // Fail early on shape errors rather than once per row.
  perturbed_model(base, perturbation, 0.0);

  PerturbationTable table;
  const Vector base_v = equilibrium_uniform(base).v_bar;
  table.rows.resize(eps_grid.size() + 1);
  table.rows[0].v_bar = base_v;

  const double amp_max = norm_inf(perturbation.amp);
  parallel_for(eps_grid.size(), threads, [&](std::size_t k) {
    PerturbationRow& row = table.rows[k + 1];
    row.eps = eps_grid[k];
    row.sigma = row.eps * amp_max;
    try {
      const Model m = perturbed_model(base, perturbation, row.eps);
      if (!validate(m).h1_monotone) {
        row.failed = true;
        row.message = "monotone sufficient condition fails";
        return;
      }
      row.v_bar = equilibrium_homotopy(m).v_bar;
      row.distance = norm_l1(subtract(row.v_bar, base_v));
      row.ratio = row.distance / std::sqrt(row.eps);
    } catch (const Error& e) {
      row.failed = true;
      row.message = e.what();
    }
  });

  double prev = 0.0;
  for (const auto& row : table.rows) {
    if (row.failed) continue;
    if (row.distance < prev) table.monotone_in_eps = false;
    prev = row.distance;
  }
  return table;
}

}  // namespace lvmut
