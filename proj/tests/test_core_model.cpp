#include <doctest.h>

#include <cmath>

#include "lvmut/errors.hpp"
#include "lvmut/model.hpp"
#include "lvmut/presets.hpp"
#include "support.hpp"

using namespace lvmut;

namespace {

Model two_genotype(double r1, double r2, double m, double big_k) {
  return build_model(2, {r1, r2}, big_k, Matrix{{0.0, m}, {m, 0.0}}, UniformLinear{{r1, r2}});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::NoConvergence;
}

// Independent form of the right-hand side: (R+M)v - v o Psi(v) / K with the
// mutation generator written out explicitly.
Vector rhs_oracle(const Model& m, const Vector& v) {
  const Vector psi = interaction_values(m, v);
  Vector out(m.n, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.n; ++j) row += m.mu(i, j);
    out[i] = (m.r[i] - row) * v[i] - v[i] * psi[i] / m.big_k;
    for (std::size_t j = 0; j < m.n; ++j)
      if (j != i) out[i] += m.mu(i, j) * v[j];
  }
  return out;
}

}  // namespace

TEST_CASE("single genotype logistic model is accepted") {
  const Model m = build_model(1, {2.0}, 1.0, Matrix{{0.0}}, UniformLinear{{1.0}});
  CHECK(m.n == 1);
  const HypothesisReport rep = validate(m);
  CHECK(rep.h1_irreducible);
  CHECK(rep.h1_to_h3());
}

TEST_CASE("point-mutation generator converts to off-diagonal rates") {
  const double mu = 0.01;
  const Matrix g = point_mutation_generator4(mu);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(sum(g.row(i))) < 1e-15);
  const Matrix rates = mutation_rates_from_generator(g);
  const Model m = build_model(4, {1, 1, 1, 1}, 100.0, rates, UniformLinear{{1, 1, 1, 1}});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(m.mu(i, i) == 0.0);
    Vector off;
    for (std::size_t j = 0; j < 4; ++j)
      if (j != i) off.push_back(m.mu(i, j));
    std::sort(off.begin(), off.end());
    CHECK(off[0] == doctest::Approx(mu * mu).epsilon(1e-14));
    CHECK(off[1] == doctest::Approx(mu * (1 - mu)).epsilon(1e-14));
    CHECK(off[2] == doctest::Approx(mu * (1 - mu)).epsilon(1e-14));
  }
  CHECK(validate(m).h1_to_h3());
}

TEST_CASE("generator rows that do not sum to zero are rejected") {
  CHECK(code_of([] { mutation_rates_from_generator(Matrix{{-0.1, 0.2}, {0.1, -0.1}}); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("build_model rejects bad inputs") {
  const UniformLinear a{{1.0, 1.0}};
  CHECK(code_of([&] { build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {-0.1, 0}}, a); }) ==
        ErrorCode::NegativeMutation);
  CHECK(code_of([&] { build_model(2, {1, 0}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, a); }) ==
        ErrorCode::NonPositiveRate);
  CHECK(code_of([&] { build_model(2, {1, 1}, 0.0, Matrix{{0, 0.1}, {0.1, 0}}, a); }) ==
        ErrorCode::NonPositiveRate);
  CHECK(code_of([&] { build_model(2, {1, 1, 1}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, a); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, UniformLinear{{1.0}}); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { build_model(2, {1, NAN}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, a); }) ==
        ErrorCode::NonFiniteInput);
  CHECK(code_of([&] {
          build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, CrowdingLinear{Matrix{{1, -1}, {1, 1}}});
        }) == ErrorCode::InvalidInteraction);
}

TEST_CASE("diagonal of mu is canonicalized to zero") {
  const Model m = build_model(2, {1, 1}, 1.0, Matrix{{5.0, 0.1}, {0.1, -3.0}}, UniformLinear{{1, 1}});
  CHECK(m.mu(0, 0) == 0.0);
  CHECK(m.mu(1, 1) == 0.0);
}

TEST_CASE("validate: half-rate condition on mutation row sums") {
  CHECK(validate(two_genotype(1, 1, 0.4, 1)).h3_half);
  CHECK_FALSE(validate(two_genotype(1, 1, 0.6, 1)).h3_half);
  CHECK(validate(two_genotype(1, 1, 0.3, 1)).h4_third);
  CHECK_FALSE(validate(two_genotype(1, 1, 0.4, 1)).h4_third);
}

TEST_CASE("validate: disconnected mutation graph is not irreducible") {
  const Matrix mu{{0, 0.1, 0}, {0.1, 0, 0}, {0, 0, 0}};
  const Model m = build_model(3, {1, 1, 1}, 1.0, mu, UniformLinear{{1, 1, 1}});
  CHECK_FALSE(validate(m).h1_irreducible);
  CHECK_FALSE(validate(m).h1_to_h3());
}

TEST_CASE("irreducibility follows directed strong connectivity") {
  CHECK(is_irreducible(Matrix{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  CHECK_FALSE(is_irreducible(Matrix{{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}));
  const Matrix cycle{{0, 0.1, 0}, {0, 0, 0.1}, {0.1, 0, 0}};
  const HypothesisReport rep = validate(build_model(3, {1, 1, 1}, 1.0, cycle, UniformLinear{{1, 1, 1}}));
  CHECK(rep.h1_irreducible);
  CHECK_FALSE(rep.h1_symmetry);
}

TEST_CASE("perturbed monotonicity uses the gradient sufficient condition") {
  const Matrix mu{{0, 0.1}, {0.1, 0}};
  const Matrix w{{0.5, -1.0}, {0.2, 0.2}};
  const Model ok = build_model(2, {1, 1}, 1.0, mu, Perturbed{UniformLinear{{1, 2}}, 0.5, {1.0, -1.5}, w});
  const Model bad = build_model(2, {1, 1}, 1.0, mu, Perturbed{UniformLinear{{1, 2}}, 1.0, {1.0, -1.5}, w});
  const HypothesisReport rep_ok = validate(ok);
  const HypothesisReport rep_bad = validate(bad);
  CHECK(rep_ok.h1_monotone);  // 1 > 0.5 * 1.5 * 1
  CHECK_FALSE(rep_bad.h1_monotone);
  auto mentions = [](const HypothesisReport& r, const std::string& s) {
    return std::any_of(r.details.begin(), r.details.end(), [&](const std::string& d) { return d.find(s) != std::string::npos; });
  };
  CHECK(mentions(rep_ok, "monotone (sufficient condition)"));
  CHECK(mentions(rep_bad, "unverified"));
}

TEST_CASE("coercivity constants per family") {
  const Model u = build_model(2, {1, 2}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, UniformLinear{{0.5, 3.0}});
  const CoercivityParams cu = coercivity_params(u);
  CHECK(cu.c_low == Vector{0.5, 0.5});
  CHECK(cu.kappa == Vector{3.0, 3.0});
  CHECK(cu.k_exp == Vector{1.0, 1.0});
  CHECK(cu.kappa0() == 6.0);

  const Model c = build_model(2, {1, 2}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, CrowdingLinear{Matrix{{1, 2}, {3, 0.25}}});
  const CoercivityParams cc = coercivity_params(c);
  CHECK(cc.c_low == Vector{1.0, 0.5});
  CHECK(cc.kappa == Vector{4.0, 3.0});

  const Model z = build_model(2, {1, 2}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, CrowdingLinear{Matrix{{1, 0}, {1, 1}}});
  CHECK_FALSE(validate(z).h2_coercive);

  const Model p = build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {0.1, 0}},
                              Perturbed{UniformLinear{{1, 2}}, 2.0, {1.5, -1.0}, Matrix{{1, 1}, {1, 1}}});
  const CoercivityParams cp = coercivity_params(p);
  CHECK(cp.c_low == Vector{0.5, 0.5});
  CHECK(cp.r_ball == doctest::Approx(6.0));  // 2 * eps * 1.5 / min a
  CHECK(cp.kappa[0] == doctest::Approx(2.0 + 2.0 * 1.5));
}

TEST_CASE("interaction values: worked examples") {
  const Model u = build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, UniformLinear{{1, 1}});
  CHECK(interaction_values(u, Vector{3, 4}) == Vector{7, 7});
  const Model c = build_model(2, {1, 2}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, CrowdingLinear{Matrix{{1, 1}, {1, 1}}});
  CHECK(interaction_values(c, Vector{1, 1}) == Vector{3, 3});
}

TEST_CASE("interaction values vanish at zero for every family") {
  testing::Rng rng(11);
  for (const Model& m : {testing::random_uniform_model(rng, 3), testing::random_crowding_model(rng, 4),
                         testing::random_perturbed_model(rng, 3, 0.1)})
    for (double x : interaction_values(m, Vector(m.n, 0.0))) CHECK(x == 0.0);
}

TEST_CASE("perturbation with eps = 0 reduces exactly to the base interaction") {
  testing::Rng rng(12);
  Model p = testing::random_perturbed_model(rng, 4, 0.0);
  const auto& pert = std::get<Perturbed>(p.interaction);
  const Model base = build_model(p.n, p.r, p.big_k, p.mu, pert.base);
  for (int k = 0; k < 100; ++k) {
    const Vector v = rng.vector(4, 0.0, 2.0 * p.big_k);
    CHECK(interaction_values(p, v) == interaction_values(base, v));
  }
}

TEST_CASE("interaction gradient: constant rows for uniform competition") {
  const Model u = build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {0.1, 0}}, UniformLinear{{2, 3}});
  const Matrix g = interaction_gradient(u, Vector{0.3, 0.7});
  CHECK(g == Matrix{{2, 3}, {2, 3}});
}

TEST_CASE("interaction gradient: tanh slope is one where <w_i, v> = 0") {
  const Matrix w{{1.0, -1.0}, {2.0, -2.0}};
  const Model p = build_model(2, {1, 1}, 1.0, Matrix{{0, 0.1}, {0.1, 0}},
                              Perturbed{UniformLinear{{1, 2}}, 0.1, {0.5, -0.3}, w});
  const Matrix g = interaction_gradient(p, Vector{1.5, 1.5});
  CHECK(g(0, 0) == doctest::Approx(1 + 0.1 * 0.5 * 1.0));
  CHECK(g(0, 1) == doctest::Approx(2 + 0.1 * 0.5 * -1.0));
  CHECK(g(1, 0) == doctest::Approx(1 + 0.1 * -0.3 * 2.0));
  CHECK(g(1, 1) == doctest::Approx(2 + 0.1 * -0.3 * -2.0));
}

TEST_CASE("interaction gradient matches central differences") {
  testing::Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = trial % 2 ? testing::random_perturbed_model(rng, 4, rng.uniform(0.0, 2.0))
                              : testing::random_crowding_model(rng, 3);
    const Vector v = rng.vector(m.n, 0.0, 2.0 * m.big_k);
    const Matrix g = interaction_gradient(m, v);
    for (std::size_t j = 0; j < m.n; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(v[j]));
      Vector vp = v, vm = v;
      vp[j] += h;
      vm[j] -= h;
      const Vector fp = interaction_values(m, vp);
      const Vector fm = interaction_values(m, vm);
      for (std::size_t i = 0; i < m.n; ++i) {
        const double fd = (fp[i] - fm[i]) / (2.0 * h);
        CHECK(std::abs(fd - g(i, j)) <= 1e-6 * std::max(1.0, std::abs(g(i, j))));
      }
    }
  }
}

TEST_CASE("interaction values are monotone for validated models") {
  testing::Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    Model m = trial % 3 == 0   ? testing::random_uniform_model(rng, 3)
              : trial % 3 == 1 ? testing::random_crowding_model(rng, 3)
                               : testing::random_perturbed_model(rng, 3, 0.2);
    if (!validate(m).h1_monotone) continue;
    const Vector v = rng.vector(3, 0.0, m.big_k);
    Vector w = v;
    for (double& x : w) x += rng.uniform(0.0, m.big_k);
    const Vector pv = interaction_values(m, v);
    const Vector pw = interaction_values(m, w);
    for (std::size_t i = 0; i < 3; ++i) CHECK(pv[i] <= pw[i] + 1e-12 * std::abs(pw[i]));
  }
}

TEST_CASE("rhs: zero state, symmetric fixed point and the explicit generator form") {
  testing::Rng rng(15);
  const Model sym = two_genotype(1, 1, 0.1, 10);
  CHECK(rhs(sym, Vector{5, 5}) == Vector{0, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = trial % 2 ? testing::random_crowding_model(rng, 4) : testing::random_perturbed_model(rng, 3, 0.3);
    for (double x : rhs(m, Vector(m.n, 0.0))) CHECK(x == 0.0);
    const Vector v = rng.vector(m.n, 0.0, 2.0 * m.big_k);
    const Vector a = rhs(m, v);
    const Vector b = rhs_oracle(m, v);
    for (std::size_t i = 0; i < m.n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12).scale(m.big_k));
  }
}

TEST_CASE("mutation terms cancel in the total for symmetric mu") {
  testing::Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const Model m = testing::random_crowding_model(rng, 5);
    const Vector v = rng.vector(5, 0.0, 2.0 * m.big_k);
    const Vector psi = interaction_values(m, v);
    double expected = 0.0;
    for (std::size_t i = 0; i < 5; ++i) expected += v[i] * (m.r[i] - psi[i] / m.big_k);
    CHECK(sum(rhs(m, v)) == doctest::Approx(expected).epsilon(1e-11).scale(m.big_k));
  }
}

TEST_CASE("validate is pure and idempotent") {
  testing::Rng rng(17);
  const Model m = testing::random_perturbed_model(rng, 4, 0.5);
  CHECK(validate(m) == validate(m));
}

TEST_CASE("R+M and the mutation shift") {
  const Model m = two_genotype(1, 2, 0.1, 1);
  CHECK(growth_mutation_matrix(m) == Matrix{{0.9, 0.1}, {0.1, 1.9}});
  CHECK(mutation_shift(m) == doctest::Approx(0.1));
}

TEST_CASE("every preset satisfies H1-H3") {
  for (const Preset& p : presets()) {
    INFO(p.name);
    CHECK(validate(p.model).h1_to_h3());
  }
}
