#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lvmut/dynamics.hpp"
#include "lvmut/errors.hpp"
#include "lvmut/presets.hpp"
#include "support.hpp"

using namespace lvmut;

namespace {

double max_gap(const Vector& a, const Vector& b) { return norm_inf(subtract(a, b)); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::NoConvergence;
}

}  // namespace

TEST_CASE("scalar logistic equation matches its closed form") {
  const Model m = build_model(1, {1.3}, 7.0, Matrix{{0.0}}, UniformLinear{{1.3}});
  for (double n0 : {0.01, 3.0, 20.0}) {
    IntegrateOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-13;
    const Trajectory tr = integrate(m, Vector{n0}, 15.0, o);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double want = logistic_solution(1.3, 7.0, n0, tr.times[k]);
      CHECK(tr.states[k][0] == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("logistic_solution: endpoints and the midpoint time") {
  CHECK(logistic_solution(2.0, 10.0, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(logistic_solution(2.0, 10.0, 1.0, 50.0) == doctest::Approx(10.0));
  // Half capacity is reached at t = log(K/n0 - 1) / xi.
  const double t_half = std::log(10.0 / 1.0 - 1.0) / 2.0;
  CHECK(logistic_solution(2.0, 10.0, 1.0, t_half) == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(logistic_solution(2.0, 10.0, 0.0, 3.0) == 0.0);
}

TEST_CASE("recorded times form the uniform grid and end exactly at t_end") {
  const Model m = preset_model("sym2");
  IntegrateOptions o;
  o.record_every = 0.3;  // m = ceil(10 / 0.3) = 34 intervals
  const Trajectory tr = integrate(m, Vector{1, 2}, 10.0, o);
  REQUIRE(tr.size() == 35);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(tr.times[k] == doctest::Approx(10.0 * k / 34.0).epsilon(1e-15));
  CHECK(tr.times.back() == 10.0);
  CHECK(tr.states.front() == Vector{1, 2});

  const Trajectory def = integrate(m, Vector{1, 2}, 10.0);
  CHECK(def.size() == 501);
}

TEST_CASE("zero initial state stays at zero") {
  const Trajectory tr = integrate(preset_model("mut4"), Vector(4, 0.0), 5.0);
  CHECK(tr.zero_initial);
  for (const Vector& s : tr.states)
    for (double x : s) CHECK(x == 0.0);
}

TEST_CASE("integrate input validation") {
  const Model m = preset_model("sym2");
  CHECK(code_of([&] { integrate(m, Vector{1, 2, 3}, 1.0); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { integrate(m, Vector{1, NAN}, 1.0); }) == ErrorCode::NonFiniteInput);
}

TEST_CASE("uniform closed form agrees with the integrator") {
  testing::Rng rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const Model m = testing::random_uniform_model(rng, rng.index(2, 5));
    const Vector v0 = rng.vector(m.n, 0.0, 2.0 * m.big_k);
    IntegrateOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-12;
    o.record_every = 0.25;
    const Trajectory num = integrate(m, v0, 10.0, o);
    const Trajectory cf = closed_form_uniform_linear(m, v0, num.times);
    REQUIRE(cf.size() == num.size());
    for (std::size_t k = 0; k < num.size(); ++k) CHECK(max_gap(num.states[k], cf.states[k]) < 1e-7 * m.big_k);
  }
}

TEST_CASE("closed form rejects models outside its scope") {
  testing::Rng rng(32);
  const Model c = testing::random_crowding_model(rng, 3);
  const Vector t{0.0, 1.0};
  CHECK(code_of([&] { closed_form_uniform_linear(c, Vector{1, 1, 1}, t); }) == ErrorCode::WrongInteractionKind);
  const Model asym = build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {0.2, 0}}, UniformLinear{{1, 1}});
  CHECK(code_of([&] { closed_form_uniform_linear(asym, Vector{1, 1}, t); }) == ErrorCode::NotSymmetric);
}

TEST_CASE("tightening tolerances reduces the error against the closed form") {
  const Model m = preset_model("mut4");
  const Vector v0{10, 20, 5, 15};
  double prev = 1e300;
  for (double rtol : {1e-5, 1e-8, 1e-11}) {
    IntegrateOptions o;
    o.rtol = rtol;
    o.atol = rtol * 1e-2;
    o.record_every = 0.5;
    const Trajectory num = integrate(m, v0, 20.0, o);
    const Trajectory cf = closed_form_uniform_linear(m, v0, num.times);
    double err = 0.0;
    for (std::size_t k = 0; k < num.size(); ++k) err = std::max(err, max_gap(num.states[k], cf.states[k]));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("trajectories stay nonnegative and above the mass floor") {
  testing::Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const Model m = trial % 3 == 0   ? testing::random_fitness_model(rng, 3)
                    : trial % 3 == 1 ? testing::random_crowding_model(rng, 4)
                                     : testing::random_perturbed_model(rng, 3, 0.05);
    Vector v0 = rng.vector(m.n, 0.0, 2.0 * m.big_k);
    v0[rng.index(0, m.n - 1)] = 0.0;  // start on a face of the orthant
    const Trajectory tr = integrate(m, v0, 30.0);
    const double floor = positivity_floor(m, v0);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      for (double x : tr.states[k]) CHECK(x >= 0.0);
      CHECK(tr.total(k) >= floor - tr.atol);
    }
  }
}

TEST_CASE("positivity floor formula") {
  const Model m = build_model(2, {1, 2}, 10.0, Matrix{{0, 0.1}, {0.1, 0}}, UniformLinear{{0.5, 4.0}});
  // kappa0 = 2 * 4 = 8 gives r_min / (2 kappa0) = 1/16.
  CHECK(positivity_floor(m, Vector{3, 3}) == doctest::Approx(1.0 / 16.0));
  CHECK(positivity_floor(m, Vector{0.05, 0.0}) == doctest::Approx(0.025));
  CHECK(code_of([&] { positivity_floor(m, Vector{0, 0}); }) == ErrorCode::ZeroInitialMass);
}

TEST_CASE("total mass lies between the logistic envelopes for fitness-weighted competition") {
  testing::Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = testing::random_fitness_model(rng, rng.index(2, 5));
    const Vector v0 = rng.vector(m.n, 0.0, 2.0 * m.big_k);
    IntegrateOptions o;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    const Trajectory tr = integrate(m, v0, 20.0, o);
    const EnvelopePair env = logistic_envelopes(m, sum(v0), tr.times);
    CHECK(env.xi_minus == *std::min_element(m.r.begin(), m.r.end()));
    CHECK(env.xi_plus == *std::max_element(m.r.begin(), m.r.end()));
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double slack = 1e-8 * m.big_k;
      CHECK(tr.total(k) >= std::min(env.n_min[k], env.n_max[k]) - slack);
      CHECK(tr.total(k) <= std::max(env.n_min[k], env.n_max[k]) + slack);
    }
  }
}

TEST_CASE("envelopes require fitness-weighted competition and positive mass") {
  testing::Rng rng(35);
  const Vector t{0.0, 1.0};
  CHECK(code_of([&] { logistic_envelopes(testing::random_crowding_model(rng, 2), 1.0, t); }) ==
        ErrorCode::WrongInteractionKind);
  CHECK(code_of([&] { logistic_envelopes(preset_model("sym2"), 0.0, t); }) == ErrorCode::ZeroInitialMass);
}

TEST_CASE("solutions stay below the linear Perron ceiling") {
  testing::Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = trial % 2 ? testing::random_crowding_model(rng, 3) : testing::random_uniform_model(rng, 4);
    PerronOptions po;
    po.shift = mutation_shift(m);
    const PerronResult p = perron_eigenpair(growth_mutation_matrix(m), po);
    const Vector v0 = rng.vector(m.n, 0.0, 2.0 * m.big_k);
    IntegrateOptions o;
    o.record_every = 0.1;
    const Trajectory tr = integrate(m, v0, 5.0, o);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const Vector cap = perron_growth_ceiling(p, v0, tr.times[k]);
      for (std::size_t i = 0; i < m.n; ++i) CHECK(tr.states[k][i] <= cap[i] * (1 + 1e-8));
    }
  }
}

TEST_CASE("gauss_legendre_adaptive on known integrals") {
  CHECK(gauss_legendre_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(gauss_legendre_adaptive([](double x) { return std::exp(3 * x); }, 0.0, 5.0) ==
        doctest::Approx((std::exp(15.0) - 1) / 3).epsilon(1e-12));
  // Sharp peak needs subdivision.
  CHECK(gauss_legendre_adaptive([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0) ==
        doctest::Approx(2.0 * std::atan(100.0) / 1e-2).epsilon(1e-10));
  // Degree-15 polynomial is exact on one panel.
  CHECK(gauss_legendre_adaptive([](double x) { return std::pow(x, 15) + x * x; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 16 + 1.0 / 3).epsilon(1e-14));
  CHECK(gauss_legendre_adaptive([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("integration is deterministic") {
  const Model m = preset_model("crowd3");
  const Vector v0{3, 40, 7};
  const Trajectory a = integrate(m, v0, 25.0);
  const Trajectory b = integrate(m, v0, 25.0);
  CHECK(a.states == b.states);
  CHECK(a.accepted_steps == b.accepted_steps);
}
