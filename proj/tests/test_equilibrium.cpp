#include <doctest.h>

#include <cmath>

#include "lvmut/dynamics.hpp"
#include "lvmut/equilibrium.hpp"
#include "lvmut/errors.hpp"
#include "lvmut/presets.hpp"
#include "support.hpp"

using namespace lvmut;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::NoConvergence;
}

Model with_uniform_crowding(const Model& m) {
  return build_model(m.n, m.r, m.big_k, m.mu, CrowdingLinear{Matrix(m.n, m.n, 1.0)});
}

}  // namespace

TEST_CASE("symmetric presets have the obvious equilibria") {
  const EquilibriumResult s = equilibrium_uniform(preset_model("sym2"));
  CHECK(s.v_bar[0] == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(s.v_bar[1] == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(s.lambda_p == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(s.alpha_bar == doctest::Approx(10.0).epsilon(1e-13));

  const EquilibriumResult m = equilibrium_uniform(preset_model("mut4"));
  for (double x : m.v_bar) CHECK(x == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(m.method == EquilibriumMethod::PerronScaling);
}

TEST_CASE("two-genotype asymmetric fitness: quadratic-formula oracle") {
  // R+M = [[0.9, 0.1], [0.1, 1.9]], eigenvector (0.1, lambda - 0.9).
  const double lambda = 1.4 + std::sqrt(0.26);
  const Vector vp{0.1, lambda - 0.9};
  const double scale = 1.0 * lambda / (vp[0] + 2.0 * vp[1]);
  const EquilibriumResult r = equilibrium_uniform(preset_model("fit2asym"));
  CHECK(r.lambda_p == doctest::Approx(lambda).epsilon(1e-13));
  CHECK(r.v_bar[0] == doctest::Approx(scale * vp[0]).epsilon(1e-12));
  CHECK(r.v_bar[1] == doctest::Approx(scale * vp[1]).epsilon(1e-12));
  CHECK(r.v_bar[0] + 2.0 * r.v_bar[1] == doctest::Approx(lambda).epsilon(1e-12));
  CHECK(r.residual < 1e-12);
}

TEST_CASE("uniform equilibrium rejects other families") {
  CHECK(code_of([] { equilibrium_uniform(preset_model("crowd3")); }) == ErrorCode::WrongInteractionKind);
}

TEST_CASE("Perron scaling on random uniform models: positivity, residual, a.v = K lambda") {
  testing::Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Model m = testing::random_uniform_model(rng, rng.index(1, 7));
    const EquilibriumResult r = equilibrium_uniform(m);
    const auto& a = std::get<UniformLinear>(m.interaction).a;
    for (double x : r.v_bar) CHECK(x > 0.0);
    CHECK(dot(a, r.v_bar) == doctest::Approx(m.big_k * r.lambda_p).epsilon(1e-12));
    CHECK(r.residual <= 1e-10 * std::max(1.0, norm_inf(r.v_bar)));
    CHECK(residual(m, r.v_bar) == doctest::Approx(r.residual));
  }
}

TEST_CASE("homotopy reproduces Perron scaling on uniform models") {
  testing::Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = testing::random_fitness_model(rng, rng.index(2, 5));
    const EquilibriumResult a = equilibrium_uniform(m);
    const EquilibriumResult b = equilibrium_homotopy(m);
    CHECK(b.method == EquilibriumMethod::Homotopy);
    CHECK(norm_inf(subtract(a.v_bar, b.v_bar)) < 1e-10 * norm_inf(a.v_bar));
  }
}

TEST_CASE("crowding with alpha = 1 everywhere equals the fitness-weighted equilibrium") {
  for (const char* name : {"sym2", "fit2asym", "mut4"}) {
    INFO(name);
    const Model base = preset_model(name);
    const EquilibriumResult a = equilibrium_uniform(base);
    const EquilibriumResult b = equilibrium_auto(with_uniform_crowding(base));
    CHECK(b.method == EquilibriumMethod::Homotopy);
    CHECK(norm_inf(subtract(a.v_bar, b.v_bar)) < 1e-10 * norm_inf(a.v_bar));
  }
}

TEST_CASE("crowd3 homotopy: path, box and a zero of the vector field") {
  const Model m = preset_model("crowd3");
  const HomotopyConfig cfg = default_homotopy_config(m);
  CHECK_FALSE(cfg.box_is_fallback);
  CHECK(cfg.box_lo > 0.0);
  CHECK(cfg.box_hi > cfg.box_lo);
  const EquilibriumResult r = equilibrium_auto(m);
  CHECK(r.method == EquilibriumMethod::Homotopy);
  REQUIRE(r.path.size() == cfg.s_steps);
  CHECK(r.path.front().s == 0.0);
  CHECK(r.path.back().s == 1.0);
  for (std::size_t k = 1; k < r.path.size(); ++k) CHECK(r.path[k].s > r.path[k - 1].s);
  for (const auto& cp : r.path) {
    CHECK(cp.mass >= cfg.box_lo);
    CHECK(cp.mass <= cfg.box_hi);
    for (double x : cp.v) CHECK(x > 0.0);
  }
  CHECK(r.residual < 1e-10);
  for (double x : rhs(m, r.v_bar)) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("homotopy equilibria on random crowding models are zeros of the field") {
  testing::Rng rng(43);
  int solved = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Model m = testing::random_crowding_model(rng, rng.index(2, 5));
    const EquilibriumResult r = equilibrium_homotopy(m);
    for (double x : r.v_bar) CHECK(x > 0.0);
    CHECK(r.residual <= 1e-9 * std::max(1.0, norm_inf(r.v_bar)));
    CHECK(sum(r.v_bar) >= r.box_lo);
    CHECK(sum(r.v_bar) <= r.box_hi);
    ++solved;
  }
  CHECK(solved == 30);
}

TEST_CASE("the equilibrium is an attractor of the flow") {
  const Model m = preset_model("crowd3");
  const EquilibriumResult r = equilibrium_auto(m);
  const Trajectory tr = integrate(m, Vector{1.0, 80.0, 3.0}, 400.0);
  CHECK(norm_inf(subtract(tr.states.back(), r.v_bar)) < 1e-6 * norm_inf(r.v_bar));
}

TEST_CASE("perturbed equilibrium is close to the unperturbed one for small eps") {
  const Model p = preset_model("pert2");
  const EquilibriumResult r = equilibrium_auto(p);
  CHECK(r.method == EquilibriumMethod::Homotopy);
  CHECK(std::abs(r.v_bar[0] - 5.0) < 1e-2);
  CHECK(std::abs(r.v_bar[1] - 5.0) < 1e-2);
  CHECK(r.residual < 1e-10);
}

TEST_CASE("homotopy refuses models violating both mutation-rate bounds") {
  const Model m = build_model(2, {1, 1}, 1.0, Matrix{{0, 0.6}, {0.6, 0}}, CrowdingLinear{Matrix{{1, 2}, {2, 1}}});
  CHECK(code_of([&] { equilibrium_homotopy(m); }) == ErrorCode::Hypothesis3Violated);
}

TEST_CASE("method names") {
  CHECK(to_string(EquilibriumMethod::PerronScaling) == "PerronScaling");
  CHECK(to_string(EquilibriumMethod::Homotopy) == "Homotopy");
}

TEST_CASE("model_perron uses the mutation shift") {
  const Model m = preset_model("fit2asym");
  const PerronResult p = model_perron(m);
  CHECK(p.mu_bar == doctest::Approx(0.1));
  CHECK(p.nu_p == doctest::Approx(p.lambda_p + 0.1));
}
