#include "lvmut/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <random>

#include "lvmut/analysis.hpp"
#include "lvmut/densela.hpp"
#include "lvmut/dynamics.hpp"
#include "lvmut/entropy.hpp"
#include "lvmut/equilibrium.hpp"
#include "lvmut/errors.hpp"
#include "lvmut/presets.hpp"

namespace lvmut {
namespace {

std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

CriterionResult result(int id, const char* name, bool passed, std::string detail) {
  return {id, name, passed, std::move(detail)};
}

std::vector<Vector> starts_for(const Model& m, std::size_t count, std::uint64_t seed) {
  return sample_initial_conditions(m.n, count, seed, 0.0, 2.0 * m.big_k);
}

const std::vector<std::string> kFitnessPresets{"sym2", "fit2asym", "mut4"};

CriterionResult c1_positivity() {
  double worst_state = std::numeric_limits<double>::infinity();
  double worst_floor_slack = std::numeric_limits<double>::infinity();
  IntegrateOptions opts;  // atol = 1e-10
  for (const auto& name : kFitnessPresets) {
    const Model m = preset_model(name);
    for (const Vector& v0 : starts_for(m, 10, 101)) {
      const Trajectory tr = integrate(m, v0, 50.0, opts);
      const double floor = positivity_floor(m, v0);
      for (std::size_t k = 0; k < tr.size(); ++k) {
        worst_state = std::min(worst_state, *std::min_element(tr.states[k].begin(), tr.states[k].end()));
        worst_floor_slack = std::min(worst_floor_slack, tr.total(k) - (floor - opts.atol));
      }
    }
  }
  const bool ok = worst_state >= 0.0 && worst_floor_slack >= 0.0;
  return result(1, "positivity and mass floor", ok,
                fmt("30 runs; min component %.3g (>= 0), min N(t) - (floor - atol) %.3g (>= 0)", worst_state,
                    worst_floor_slack));
}

CriterionResult c2_equilibrium() {
  const double expected = (2.8 + std::sqrt(1.04)) / 2.0;
  const EquilibriumResult f = equilibrium_uniform(preset_model("fit2asym"));
  const EquilibriumResult s = equilibrium_uniform(preset_model("sym2"));
  const double dl = std::abs(f.lambda_p - expected);
  const double ds = norm_inf(subtract(s.v_bar, Vector{5.0, 5.0}));
  const bool ok = dl <= 1e-9 && f.residual <= 1e-10 && ds <= 1e-10;
  return result(2, "equilibrium correctness", ok,
                fmt("fit2asym |lambda_p - (2.8+sqrt(1.04))/2| = %.3g (<= 1e-9), residual %.3g (<= 1e-10); "
                    "sym2 |vbar - (5,5)|_inf = %.3g (<= 1e-10)",
                    dl, f.residual, ds));
}

CriterionResult c3_mass_law() {
  double worst = 0.0;
  std::string detail;
  for (const auto& name : kFitnessPresets) {
    const Model m = preset_model(name);
    const double rel = std::abs(sum(equilibrium_uniform(m).v_bar) - m.big_k) / m.big_k;
    worst = std::max(worst, rel);
    detail += fmt("%s %.3g; ", name.c_str(), rel);
  }
  return result(3, "mass law sum(vbar) = K", worst <= 1e-8, detail + fmt("max |sum - K|/K %.3g (<= 1e-8)", worst));
}

CriterionResult c4_global_stability() {
  const Model m = preset_model("mut4");
  StabilityOptions opts;
  opts.n_samples = 20;
  opts.seed = 404;
  opts.t_end = 200.0;
  opts.tol = 1e-6;
  const StabilityReport rep = global_stability_experiment(m, opts);
  std::string detail = fmt("t=200: max pairwise gap %.3g, max gap to vbar %.3g (both <= 1e-6)",
                           rep.max_pairwise_gap, rep.max_gap_to_equilibrium);
  if (!rep.converged) {
    opts.t_end = 1500.0;
    const StabilityReport late = global_stability_experiment(m, opts);
    detail += fmt(" | diagnostic only, same starts at t=1500: pairwise %.3g, to vbar %.3g", late.max_pairwise_gap,
                  late.max_gap_to_equilibrium);
  }
  return result(4, "global stability on mut4", rep.converged, detail);
}

CriterionResult c5_entropy_identity() {
  const Model m = preset_model("mut4");
  const Vector v_bar = equilibrium_uniform(m).v_bar;
  const Vector v0{10.0, 20.0, 5.0, 15.0};
  const double t_end = 20.0;
  IntegrateOptions opts;
  opts.rtol = 1e-10;
  opts.atol = 1e-12;
  opts.record_every = t_end / 999.0;
  const Trajectory coarse = integrate(m, v0, t_end, opts);
  opts.record_every = t_end / 1998.0;
  const Trajectory fine = integrate(m, v0, t_end, opts);
  const double r1 = identity_residual(m, coarse, v_bar, QuadraticKernel{});
  const double r2 = identity_residual(m, fine, v_bar, QuadraticKernel{});
  const bool ok = coarse.size() == 1000 && r1 <= 1e-4 && r1 / r2 >= 3.0;
  return result(5, "entropy identity (quadratic kernel)", ok,
                fmt("%zu samples: residual %.3g (<= 1e-4); halved step %.3g, ratio %.3g (>= 3)", coarse.size(), r1,
                    r2, r1 / r2));
}

CriterionResult c6_lyapunov() {
  double worst_increase = -std::numeric_limits<double>::infinity();
  double worst_bound_gap = std::numeric_limits<double>::infinity();    // min F - log(1/max vbar)
  double worst_sharp_gap = std::numeric_limits<double>::infinity();    // min F - log(1/E(vbar))
  std::string per_preset;
  IntegrateOptions opts;
  opts.rtol = 1e-10;
  opts.atol = 1e-12;
  for (const auto& name : kFitnessPresets) {
    const Model m = preset_model(name);
    const Vector v_bar = equilibrium_uniform(m).v_bar;
    const double bound = std::log(1.0 / norm_inf(v_bar));
    const double sharp = std::log(1.0 / dot(v_bar, v_bar));
    double preset_min_f = std::numeric_limits<double>::infinity();
    for (const Vector& v0 : starts_for(m, 5, 606)) {
      const LyapunovSeries f = lyapunov_descent(m, integrate(m, v0, 50.0, opts), v_bar);
      worst_increase = std::max(worst_increase, f.max_increase);
      const double fmin = *std::min_element(f.f.begin(), f.f.end());
      preset_min_f = std::min(preset_min_f, fmin);
      worst_bound_gap = std::min(worst_bound_gap, fmin - bound);
      worst_sharp_gap = std::min(worst_sharp_gap, fmin - sharp);
    }
    per_preset += fmt("%s min F %.4g vs log(1/max vbar) %.4g; ", name.c_str(), preset_min_f, bound);
  }
  const bool monotone = worst_increase <= 1e-9;
  const bool bounded = worst_bound_gap >= 0.0;
  return result(6, "Lyapunov descent", monotone && bounded,
                fmt("max F increase %.3g (<= 1e-9) [%s]; lower bound F >= log(1/max vbar): %s. ", worst_increase,
                    monotone ? "ok" : "violated", bounded ? "ok" : "violated") +
                    per_preset +
                    fmt("diagnostic: min F - log(1/E(vbar)) = %.3g", worst_sharp_gap));
}

CriterionResult c7_spectral_gap() {
  const Model m = preset_model("sym2");
  const Vector v_bar = equilibrium_uniform(m).v_bar;
  const SpectralGapReport gap = spectral_gap(m, v_bar);
  std::mt19937_64 gen(707);
  double min_quotient = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    Vector h(m.n);
    for (double& x : h) x = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
    h = project_orthogonal(h, v_bar);
    if (dot(h, h) == 0.0) continue;
    min_quotient = std::min(min_quotient, rayleigh_quotient(m, h, v_bar));
  }
  const double dc = std::abs(gap.c1 - 0.2);
  const bool ok = dc <= 1e-10 && min_quotient >= gap.c1 - 1e-9;
  return result(7, "spectral gap", ok,
                fmt("sym2 c1 = %.15g, |c1 - 0.2| = %.3g (<= 1e-10); min Rayleigh quotient over 1000 draws %.12g "
                    "(>= c1 - 1e-9)",
                    gap.c1, dc, min_quotient));
}

CriterionResult c8_rate() {
  const Model m = preset_model("sym2");
  const Vector v_bar = equilibrium_uniform(m).v_bar;
  const double c1 = spectral_gap(m, v_bar).c1;
  IntegrateOptions opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-14;
  opts.record_every = 0.1;
  const Trajectory tr = integrate(m, Vector{8.0, 2.0}, 60.0, opts);
  const RateReport rate = convergence_rate(tr, v_bar, 0.5, c1);

  double worst = -std::numeric_limits<double>::infinity();
  Vector g(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const Decomposition d = decompose(tr.states[k], v_bar);
    g[k] = std::log(d.e_h / (d.beta * d.beta));
  }
  for (std::size_t k = 1; k + 1 < tr.size(); ++k)
    worst = std::max(worst, (g[k + 1] - g[k - 1]) / (tr.times[k + 1] - tr.times[k - 1]));
  const bool ok = rate.fitted_rate_eh <= -0.95 * c1 && rate.r_squared >= 0.999 && worst <= -c1 + 1e-6;
  return result(8, "exponential rate", ok,
                fmt("fitted rate of E(h) %.6g (<= -0.95 c1 = %.6g), r^2 %.8f (>= 0.999); "
                    "max d/dt log(E(h)/beta^2) %.6g (<= -c1 + 1e-6 = %.6g)",
                    rate.fitted_rate_eh, -0.95 * c1, rate.r_squared, worst, -c1 + 1e-6));
}

CriterionResult c9_closed_form() {
  double worst = 0.0;
  for (const std::string name : {"sym2", "mut4"}) {
    const Model m = preset_model(name);
    for (const Vector& v0 : starts_for(m, 3, 909)) {
      const Trajectory num = integrate(m, v0, 20.0);
      const Trajectory exact = closed_form_uniform_linear(m, v0, num.times);
      for (std::size_t k = 0; k < num.size(); ++k)
        worst = std::max(worst, norm_inf(subtract(num.states[k], exact.states[k])) / norm_inf(exact.states[k]));
    }
  }
  return result(9, "closed form vs integrator", worst <= 1e-6,
                fmt("sym2 and mut4, 3 starts each on [0, 20]: max relative sup gap %.3g (<= 1e-6)", worst));
}

CriterionResult c10_envelopes() {
  double worst = std::numeric_limits<double>::infinity();
  IntegrateOptions opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-12;
  for (const auto& name : kFitnessPresets) {
    const Model m = preset_model(name);
    std::vector<Vector> starts = starts_for(m, 5, 1010);
    starts.push_back(Vector(m.n, 0.5 * m.big_k / static_cast<double>(m.n)));
    for (const Vector& v0 : starts) {
      const Trajectory tr = integrate(m, v0, 30.0, opts);
      const EnvelopePair env = logistic_envelopes(m, sum(v0), tr.times);
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const double lo = std::min(env.n_min[k], env.n_max[k]);
        const double hi = std::max(env.n_min[k], env.n_max[k]);
        const double n = tr.total(k);
        worst = std::min({worst, n - lo, hi - n});
      }
    }
  }
  return result(10, "logistic envelopes", worst >= -1e-8,
                fmt("sym2, fit2asym, mut4, 6 starts each: min sandwich slack %.3g (>= -1e-8)", worst));
}

CriterionResult c11_homotopy() {
  double worst_agree = 0.0;
  double worst_residual = 0.0;
  bool in_box = true;
  for (const auto& name : kFitnessPresets) {
    const Model u = preset_model(name);
    const Model c = build_model(u.n, u.r, u.big_k, u.mu, CrowdingLinear{Matrix(u.n, u.n, 1.0)});
    const EquilibriumResult h = equilibrium_homotopy(c);
    const EquilibriumResult p = equilibrium_uniform(u);
    worst_agree = std::max(worst_agree, norm_inf(subtract(h.v_bar, p.v_bar)));
    worst_residual = std::max(worst_residual, h.residual);
    for (const auto& cp : h.path) in_box = in_box && cp.mass >= h.box_lo && cp.mass <= h.box_hi;
  }

  std::mt19937_64 gen(1111);
  auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  int pd = 0;
  int tried = 0;
  while (tried < 50) {
    const std::size_t n = 2 + static_cast<std::size_t>(unit() * 5.0);
    Vector r(n);
    for (double& x : r) x = 0.5 + 1.5 * unit();
    Matrix mu(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) mu(i, j) = mu(j, i) = 0.01 + unit();
    // Scale so every row sum lies strictly below r_i / 2.
    double scale = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) scale = std::min(scale, 0.5 * r[i] / sum(mu.row(i)));
    mu = (scale * (0.05 + 0.9 * unit())) * mu;
    const Model m = build_model(n, r, 1.0 + 99.0 * unit(), mu, UniformLinear{r});
    if (!validate(m).h1_to_h3()) continue;
    ++tried;
    if (is_positive_definite(growth_mutation_matrix(m))) ++pd;
  }
  const bool ok = worst_agree <= 1e-7 && worst_residual <= 1e-12 && in_box && pd == 50;
  return result(11, "homotopy solver", ok,
                fmt("crowding alpha=1 vs Perron on sym2/fit2asym/mut4: max gap %.3g (<= 1e-7), max residual %.3g "
                    "(<= 1e-12), path in box: %s; H3 models with R+M positive definite: %d/50",
                    worst_agree, worst_residual, in_box ? "yes" : "no", pd));
}

CriterionResult c12_perturbation() {
  const Preset& p = find_preset("pert2");
  const Model base = preset_model("sym2");
  const Vector grid{1e-4, 4e-4, 1.6e-3, 6.4e-3};
  const PerturbationTable table = perturbation_sweep(base, *p.perturbation, grid);
  bool positive = true;
  bool all_ok = true;
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  double worst_gap = 0.0;
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    if (row.failed) {
      all_ok = false;
      continue;
    }
    positive = positive && *std::min_element(row.v_bar.begin(), row.v_bar.end()) > 0.0;
    rmin = std::min(rmin, row.ratio);
    rmax = std::max(rmax, row.ratio);
    StabilityOptions opts;
    opts.n_samples = 5;
    opts.seed = 1212 + k;
    opts.t_end = 200.0;
    opts.tol = 1e-5;
    const StabilityReport rep = global_stability_experiment(perturbed_model(base, *p.perturbation, row.eps), opts);
    all_ok = all_ok && rep.converged;
    worst_gap = std::max({worst_gap, rep.max_gap_to_equilibrium, rep.max_pairwise_gap});
  }
  const double spread = rmax / rmin;
  const bool ok = all_ok && positive && spread <= 10.0;
  return result(12, "perturbation bound", ok,
                fmt("eps in {1e-4, 4e-4, 1.6e-3, 6.4e-3}: equilibria positive: %s; max stability gap %.3g "
                    "(<= 1e-5); ratio range [%.4g, %.4g], spread %.4g (<= 10)",
                    positive ? "yes" : "no", worst_gap, rmin, rmax, spread));
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> all = [] {
    std::vector<Criterion> c;
    auto add = [&](int id, const char* name, CriterionResult (*fn)()) {
      c.push_back({id, name, [id, name, fn] {
                     try {
                       return fn();
                     } catch (const std::exception& e) {
                       return CriterionResult{id, name, false, std::string("raised: ") + e.what()};
                     }
                   }});
    };
    add(1, "positivity and mass floor", c1_positivity);
    add(2, "equilibrium correctness", c2_equilibrium);
    add(3, "mass law sum(vbar) = K", c3_mass_law);
    add(4, "global stability on mut4", c4_global_stability);
    add(5, "entropy identity (quadratic kernel)", c5_entropy_identity);
    add(6, "Lyapunov descent", c6_lyapunov);
    add(7, "spectral gap", c7_spectral_gap);
    add(8, "exponential rate", c8_rate);
    add(9, "closed form vs integrator", c9_closed_form);
    add(10, "logistic envelopes", c10_envelopes);
    add(11, "homotopy solver", c11_homotopy);
    add(12, "perturbation bound", c12_perturbation);
    return c;
  }();
  return all;
}

std::string format_result_line(const CriterionResult& r) {
  return fmt("[%s] C%d %s: ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str()) + r.detail;
}

}  // namespace lvmut
