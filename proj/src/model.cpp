#include "lvmut/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvmut/errors.hpp"

namespace lvmut {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double symmetry_tol(const Matrix& m) { return 1e-12 * std::max(1.0, max_abs_entry(m)); }

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs)
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has a non-finite entry");
}

void require_finite(const Matrix& m, const char* what) {
  for (std::size_t i = 0; i < m.rows(); ++i) require_finite(m.row(i), what);
}

void require_square(const Matrix& m, std::size_t n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << what << " must be " << n << "x" << n << ", got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

void require_length(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << " must have length " << n << ", got " << v.size();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

double min_of(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }
double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

// eps * max_i(|amp_i| * max_j |w_ij|): the largest possible downward
// deflection of a gradient entry caused by the tanh perturbation.
double perturbation_gradient_bound(const Perturbed& p) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.amp.size(); ++i)
    worst = std::max(worst, std::abs(p.amp[i]) * norm_inf(p.w.row(i)));
  return p.eps * worst;
}

}  // namespace

std::string interaction_kind(const Interaction& interaction) {
  return std::visit(overloaded{[](const UniformLinear&) { return std::string("uniform"); },
                               [](const CrowdingLinear&) { return std::string("crowding"); },
                               [](const Perturbed&) { return std::string("perturbed"); }},
                    interaction);
}

bool Model::is_fitness_weighted() const {
  const auto* u = std::get_if<UniformLinear>(&interaction);
  return u != nullptr && u->a == r;
}

bool Model::mu_is_symmetric() const { return is_symmetric(mu, symmetry_tol(mu)); }

Model build_model(std::size_t n, Vector r, double big_k, Matrix mu, Interaction interaction) {
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "n must be at least 1");
  require_length(r, n, "r");
  require_square(mu, n, "mu");
  require_finite(r, "r");
  require_finite(mu, "mu");
  if (!std::isfinite(big_k)) throw Error(ErrorCode::NonFiniteInput, "K is not finite");

  std::visit(overloaded{[&](const UniformLinear& u) {
                          require_length(u.a, n, "interaction.a");
                          require_finite(u.a, "interaction.a");
                        },
                        [&](const CrowdingLinear& c) {
                          require_square(c.alpha, n, "interaction.alpha");
                          require_finite(c.alpha, "interaction.alpha");
                          for (std::size_t i = 0; i < n; ++i)
                            for (double x : c.alpha.row(i))
                              if (x < 0.0)
                                throw Error(ErrorCode::InvalidInteraction, "crowding index alpha must be nonnegative");
                        },
                        [&](const Perturbed& p) {
                          require_length(p.base.a, n, "interaction.a");
                          require_length(p.amp, n, "interaction.amp");
                          require_square(p.w, n, "interaction.w");
                          require_finite(p.base.a, "interaction.a");
                          require_finite(p.amp, "interaction.amp");
                          require_finite(p.w, "interaction.w");
                          if (!std::isfinite(p.eps) || p.eps < 0.0)
                            throw Error(ErrorCode::InvalidInteraction, "perturbation eps must be finite and >= 0");
                        }},
             interaction);

  for (std::size_t i = 0; i < n; ++i)
    if (r[i] <= 0.0) throw Error(ErrorCode::NonPositiveRate, "growth rate r[" + std::to_string(i) + "] must be > 0");
  if (big_k <= 0.0) throw Error(ErrorCode::NonPositiveRate, "carrying capacity K must be > 0");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && mu(i, j) < 0.0)
        throw Error(ErrorCode::NegativeMutation,
                    "mu[" + std::to_string(i) + "][" + std::to_string(j) + "] is negative");
  for (std::size_t i = 0; i < n; ++i) mu(i, i) = 0.0;

  return Model{n, std::move(r), big_k, std::move(mu), std::move(interaction)};
}

Matrix mutation_rates_from_generator(const Matrix& generator, double tol) {
  if (!generator.is_square()) throw Error(ErrorCode::DimensionMismatch, "generator must be square");
  Matrix rates = generator;
  for (std::size_t i = 0; i < generator.rows(); ++i) {
    const double row_sum = sum(generator.row(i));
    if (std::abs(row_sum) > tol * std::max(1.0, norm_l1(generator.row(i))))
      throw Error(ErrorCode::DimensionMismatch,
                  "generator row " + std::to_string(i) + " does not sum to zero");
    rates(i, i) = 0.0;
  }
  return rates;
}

Matrix point_mutation_generator4(double rate) {
  const double one = rate * (1.0 - rate);
  const double two = rate * rate;
  const double stay = (1.0 - rate) * (1.0 - rate) - 1.0;
  return Matrix{{stay, one, one, two}, {one, stay, two, one}, {one, two, stay, one}, {two, one, one, stay}};
}

double CoercivityParams::kappa0() const { return sum(kappa); }

CoercivityParams coercivity_params(const Model& model) {
  const std::size_t n = model.n;
  CoercivityParams p;
  p.r_ball = 1.0;
  p.k_exp.assign(n, 1.0);
  p.c_low.assign(n, 0.0);
  p.kappa.assign(n, 0.0);
  std::visit(overloaded{[&](const UniformLinear& u) {
                          std::fill(p.c_low.begin(), p.c_low.end(), min_of(u.a));
                          std::fill(p.kappa.begin(), p.kappa.end(), std::max(0.0, max_of(u.a)));
                        },
                        [&](const CrowdingLinear& c) {
                          for (std::size_t i = 0; i < n; ++i) {
                            double lo = std::numeric_limits<double>::infinity();
                            double hi = 0.0;
                            for (std::size_t j = 0; j < n; ++j) {
                              const double coef = c.alpha(i, j) * model.r[j];
                              lo = std::min(lo, coef);
                              hi = std::max(hi, coef);
                            }
                            p.c_low[i] = lo;
                            p.kappa[i] = hi;
                          }
                        },
                        [&](const Perturbed& pert) {
                          // Psi_i >= min(a) N - eps|amp_i|  >= (min(a)/2) N  once N >= 2 eps|amp_i|/min(a).
                          const double amin = min_of(pert.base.a);
                          const double amax = std::max(0.0, max_of(pert.base.a));
                          for (std::size_t i = 0; i < n; ++i) {
                            const double shift = pert.eps * std::abs(pert.amp[i]);
                            p.c_low[i] = amin / 2.0;
                            if (amin > 0.0) p.r_ball = std::max(p.r_ball, 2.0 * shift / amin);
                            p.kappa[i] = amax + shift * norm_inf(pert.w.row(i));
                          }
                        }},
             model.interaction);
  return p;
}

bool is_irreducible(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n <= 1) return true;
  // Strongly connected iff every vertex is reachable from 0 in the graph and
  // in its reverse.
  auto reaches_all = [&](bool reverse) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        const double w = reverse ? m(j, i) : m(i, j);
        if (j != i && w > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
  };
  return reaches_all(false) && reaches_all(true);
}

HypothesisReport validate(const Model& model) {
  HypothesisReport rep;
  const std::size_t n = model.n;
  auto note = [&](const std::string& s) { rep.details.push_back(s); };

  rep.h1_positivity = std::all_of(model.r.begin(), model.r.end(), [](double x) { return x > 0.0; });
  note(std::string("H1 positivity: ") + (rep.h1_positivity ? "all r_i > 0" : "some r_i <= 0"));

  rep.h1_symmetry = model.mu_is_symmetric();
  note(std::string("H1 symmetry: ") + (rep.h1_symmetry ? "mu symmetric" : "mu not symmetric"));

  rep.h1_irreducible = is_irreducible(model.mu);
  note(std::string("H1 irreducibility: ") +
       (n == 1 ? "vacuous (n = 1)" : rep.h1_irreducible ? "mutation graph strongly connected"
                                                        : "mutation graph not strongly connected"));

  std::visit(overloaded{[&](const UniformLinear& u) {
                          rep.h1_monotone = min_of(u.a) >= 0.0;
                          note(std::string("H1 monotone: ") + (rep.h1_monotone ? "exact (a >= 0)" : "fails (some a_j < 0)"));
                        },
                        [&](const CrowdingLinear&) {
                          rep.h1_monotone = true;
                          note("H1 monotone: exact (alpha >= 0, r > 0)");
                        },
                        [&](const Perturbed& p) {
                          const double amin = min_of(p.base.a);
                          const double bound = perturbation_gradient_bound(p);
                          rep.h1_monotone = amin > bound;
                          std::ostringstream os;
                          os << "H1 monotone: "
                             << (rep.h1_monotone ? "monotone (sufficient condition)" : "unverified")
                             << " min a = " << amin << ", eps*max|amp||w| = " << bound;
                          note(os.str());
                        }},
             model.interaction);

  const CoercivityParams cp = coercivity_params(model);
  rep.h2_coercive = std::all_of(cp.c_low.begin(), cp.c_low.end(), [](double c) { return c > 0.0; });
  {
    std::ostringstream os;
    os << "H2 coercive: " << (rep.h2_coercive ? "yes" : "no") << " (R = " << cp.r_ball
       << ", min c_i = " << min_of(cp.c_low) << ", k_i = 1)";
    note(os.str());
  }

  rep.h3_half = true;
  rep.h4_third = true;
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    double sym = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out += model.mu(i, j);
      sym += 0.5 * (model.mu(i, j) + model.mu(j, i));
    }
    if (out > model.r[i] / 2.0) {
      rep.h3_half = false;
      note("H3 fails at row " + std::to_string(i));
    }
    if (sym > model.r[i] / 3.0) {
      rep.h4_third = false;
      note("H4 fails at row " + std::to_string(i));
    }
  }
  note(std::string("H3: ") + (rep.h3_half ? "holds" : "fails"));
  note(std::string("H4: ") + (rep.h4_third ? "holds" : "fails"));
  return rep;
}

Vector interaction_values(const Model& model, std::span<const double> v) {
  const std::size_t n = model.n;
  Vector psi(n, 0.0);
  std::visit(overloaded{[&](const UniformLinear& u) { std::fill(psi.begin(), psi.end(), dot(u.a, v)); },
                        [&](const CrowdingLinear& c) {
                          for (std::size_t i = 0; i < n; ++i) {
                            double s = 0.0;
                            for (std::size_t j = 0; j < n; ++j) s += c.alpha(i, j) * model.r[j] * v[j];
                            psi[i] = s;
                          }
                        },
                        [&](const Perturbed& p) {
                          const double shared = dot(p.base.a, v);
                          for (std::size_t i = 0; i < n; ++i)
                            psi[i] = shared + p.eps * p.amp[i] * std::tanh(dot(p.w.row(i), v));
                        }},
             model.interaction);
  return psi;
}

Matrix interaction_gradient(const Model& model, std::span<const double> v) {
  const std::size_t n = model.n;
  Matrix g(n, n);
  std::visit(overloaded{[&](const UniformLinear& u) {
                          for (std::size_t i = 0; i < n; ++i) std::copy(u.a.begin(), u.a.end(), g.row(i).begin());
                        },
                        [&](const CrowdingLinear& c) {
                          for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t j = 0; j < n; ++j) g(i, j) = c.alpha(i, j) * model.r[j];
                        },
                        [&](const Perturbed& p) {
                          for (std::size_t i = 0; i < n; ++i) {
                            const double t = std::tanh(dot(p.w.row(i), v));
                            const double scale = p.eps * p.amp[i] * (1.0 - t * t);
                            for (std::size_t j = 0; j < n; ++j) g(i, j) = p.base.a[j] + scale * p.w(i, j);
                          }
                        }},
             model.interaction);
  return g;
}

Vector rhs(const Model& model, std::span<const double> v) {
  const std::size_t n = model.n;
  const Vector psi = interaction_values(model, v);
  Vector dv(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mut = 0.0;
    for (std::size_t j = 0; j < n; ++j) mut += model.mu(i, j) * (v[j] - v[i]);
    dv[i] = v[i] * (model.r[i] - psi[i] / model.big_k) + mut;
  }
  return dv;
}

Matrix growth_mutation_matrix(const Model& model) {
  Matrix a = model.mu;
  for (std::size_t i = 0; i < model.n; ++i) a(i, i) = model.r[i] - sum(model.mu.row(i));
  return a;
}

double mutation_shift(const Model& model) {
  double m = 0.0;
  for (std::size_t i = 0; i < model.n; ++i) m = std::max(m, sum(model.mu.row(i)));
  return m;
}

}  // namespace lvmut
