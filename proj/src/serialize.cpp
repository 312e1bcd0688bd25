#include "lvmut/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lvmut/errors.hpp"
#include "lvmut/presets.hpp"

namespace lvmut {
namespace {

using nlohmann::json;

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw InputError(path, "'" + path + "' must be an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(path + "." + key, "missing key '" + path + "." + key + "'");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw InputError(path, "'" + path + "' must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw InputError(path, "'" + path + "' must be finite");
  return x;
}

Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(path, "'" + path + "' must be an array of numbers");
  Vector v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(as_number(j[k], path + "[" + std::to_string(k) + "]"));
  return v;
}

Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw InputError(path, "'" + path + "' must be a non-empty array of rows");
  std::vector<Vector> rows;
  for (std::size_t k = 0; k < j.size(); ++k) {
    rows.push_back(as_vector(j[k], path + "[" + std::to_string(k) + "]"));
    if (rows.back().size() != rows.front().size())
      throw InputError(path + "[" + std::to_string(k) + "]", "'" + path + "' rows differ in length");
  }
  return Matrix::from_rows(rows);
}

json vec(std::span<const double> v) { return json(Vector(v.begin(), v.end())); }

json mat(const Matrix& m) { return json(m.to_rows()); }

void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& path) {
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError(path.empty() ? key : path + "." + key, "unknown key '" + key + "'");
}

void csv_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) out << (k ? "," : "") << format_double(values[k]);
  out << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Model model_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw InputError(path, "'" + path + "' must be an object");
  reject_unknown(j, {"n", "r", "K", "mu", "interaction"}, path);
  const json& jn = require(j, "n", path);
  if (!jn.is_number_integer() || jn.get<long long>() < 1)
    throw InputError(path + ".n", "'" + path + ".n' must be an integer >= 1");
  const auto n = static_cast<std::size_t>(jn.get<long long>());
  Vector r = as_vector(require(j, "r", path), path + ".r");
  const double big_k = as_number(require(j, "K", path), path + ".K");
  Matrix mu = as_matrix(require(j, "mu", path), path + ".mu");

  const std::string ipath = path + ".interaction";
  const json& ji = require(j, "interaction", path);
  const json& jk = require(ji, "kind", ipath);
  if (!jk.is_string()) throw InputError(ipath + ".kind", "'" + ipath + ".kind' must be a string");
  const std::string kind = jk.get<std::string>();
  Interaction interaction;
  if (kind == "uniform") {
    reject_unknown(ji, {"kind", "a"}, ipath);
    interaction = UniformLinear{as_vector(require(ji, "a", ipath), ipath + ".a")};
  } else if (kind == "crowding") {
    reject_unknown(ji, {"kind", "alpha"}, ipath);
    interaction = CrowdingLinear{as_matrix(require(ji, "alpha", ipath), ipath + ".alpha")};
  } else if (kind == "perturbed") {
    reject_unknown(ji, {"kind", "a", "eps", "amp", "w"}, ipath);
    interaction = Perturbed{UniformLinear{as_vector(require(ji, "a", ipath), ipath + ".a")},
                            as_number(require(ji, "eps", ipath), ipath + ".eps"),
                            as_vector(require(ji, "amp", ipath), ipath + ".amp"),
                            as_matrix(require(ji, "w", ipath), ipath + ".w")};
  } else {
    throw InputError(ipath + ".kind", "'" + ipath + ".kind' must be uniform, crowding or perturbed");
  }

  for (std::size_t i = 0; i < r.size(); ++i)
    if (!(r[i] > 0.0)) {
      const std::string key = path + ".r[" + std::to_string(i) + "]";
      throw InputError(key, "'" + key + "' must be a positive growth rate");
    }
  if (!(big_k > 0.0)) throw InputError(path + ".K", "'" + path + ".K' must be positive");
  for (std::size_t i = 0; i < mu.rows(); ++i)
    for (std::size_t c = 0; c < mu.cols(); ++c)
      if (i != c && mu(i, c) < 0.0) {
        const std::string key = path + ".mu[" + std::to_string(i) + "][" + std::to_string(c) + "]";
        throw InputError(key, "'" + key + "' must be a nonnegative mutation rate");
      }

  try {
    return build_model(n, std::move(r), big_k, std::move(mu), std::move(interaction));
  } catch (const Error& e) {
    std::string key = path;
    switch (e.code()) {
      case ErrorCode::NegativeMutation: key += ".mu"; break;
      case ErrorCode::InvalidInteraction: key = ipath; break;
      default: break;
    }
    throw InputError(key, e.what());
  }
}

json model_to_json(const Model& model) {
  json j;
  j["n"] = model.n;
  j["r"] = vec(model.r);
  j["K"] = model.big_k;
  j["mu"] = mat(model.mu);
  json ji;
  ji["kind"] = interaction_kind(model.interaction);
  if (const auto* u = std::get_if<UniformLinear>(&model.interaction)) {
    ji["a"] = vec(u->a);
  } else if (const auto* c = std::get_if<CrowdingLinear>(&model.interaction)) {
    ji["alpha"] = mat(c->alpha);
  } else {
    const auto& p = std::get<Perturbed>(model.interaction);
    ji["a"] = vec(p.base.a);
    ji["eps"] = p.eps;
    ji["amp"] = vec(p.amp);
    ji["w"] = mat(p.w);
  }
  j["interaction"] = ji;
  return j;
}

json to_json(const HypothesisReport& r) {
  return json{{"h1_positivity", r.h1_positivity}, {"h1_symmetry", r.h1_symmetry},
              {"h1_irreducible", r.h1_irreducible}, {"h1_monotone", r.h1_monotone},
              {"h2_coercive", r.h2_coercive},     {"h3_half", r.h3_half},
              {"h4_third", r.h4_third},           {"h1_to_h3", r.h1_to_h3()},
              {"details", r.details}};
}

json to_json(const EquilibriumResult& r) {
  json j{{"v_bar", vec(r.v_bar)},       {"alpha_bar", r.alpha_bar}, {"lambda_p", r.lambda_p},
         {"nu_p", r.nu_p},              {"v_p", vec(r.v_p)},        {"residual", r.residual},
         {"method", to_string(r.method)}, {"warnings", r.warnings}};
  if (r.method == EquilibriumMethod::Homotopy) {
    j["box"] = {r.box_lo, r.box_hi};
    j["newton_iterations"] = r.newton_iterations;
    json path = json::array();
    for (const auto& c : r.path)
      path.push_back({{"s", c.s}, {"v", vec(c.v)}, {"residual", c.residual}, {"mass", c.mass},
                      {"iterations", c.iterations}});
    j["homotopy_path"] = path;
  }
  return j;
}

json to_json(const SpectralGapReport& r) {
  return json{{"d_matrix", mat(r.d_matrix)},           {"m_tilde", mat(r.m_tilde)},
              {"eigenvalues_of_d_minus_m", vec(r.eigenvalues)}, {"c1", r.c1},
              {"kernel_vector", vec(r.kernel_vector)}, {"c1_vector", vec(r.c1_vector)}};
}

json to_json(const RateReport& r) {
  return json{{"fitted_rate_eh", r.fitted_rate_eh}, {"fitted_rate_sup", r.fitted_rate_sup},
              {"predicted_c1", r.predicted_c1},     {"window", {r.t_start, r.t_end}},
              {"r_squared", r.r_squared},           {"r_squared_sup", r.r_squared_sup},
              {"points", r.points}};
}

json to_json(const StabilityReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"v0", vec(s.v0)}, {"v_end", vec(s.v_end)}, {"gap_to_equilibrium", s.gap_to_equilibrium},
                       {"excluded_zero", s.excluded_zero}});
  json j{{"converged", r.converged},   {"max_pairwise_gap", r.max_pairwise_gap},
         {"max_gap_to_equilibrium", r.max_gap_to_equilibrium}, {"attractor", vec(r.attractor)},
         {"excluded", r.excluded},     {"in_scope", r.in_scope},
         {"scope_note", r.scope_note}, {"samples", samples}};
  if (!r.in_scope) j["warning"] = "OUT OF THEOREM SCOPE (forced run): " + r.scope_note;
  return j;
}

json to_json(const PerturbationTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"eps", r.eps},     {"v_bar", vec(r.v_bar)}, {"distance", r.distance}, {"ratio", r.ratio},
                    {"sigma", r.sigma}, {"failed", r.failed},    {"message", r.message}});
  return json{{"rows", rows}, {"monotone_in_eps", t.monotone_in_eps}};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const std::size_t n = trajectory.states.empty() ? 0 : trajectory.states.front().size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",v_" << i;
  out << ",total\n";
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    Vector row{trajectory.times[k]};
    row.insert(row.end(), trajectory.states[k].begin(), trajectory.states[k].end());
    row.push_back(trajectory.total(k));
    csv_row(out, row);
  }
}

void write_entropy_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  out << "t,H,D,gamma_term,analytic_dt,F,E_h,lambda,beta\n";
  for (const auto& r : rows)
    csv_row(out, Vector{r.t, r.entropy.h_value, r.entropy.d_value, r.entropy.gamma_term, r.entropy.analytic_dt,
                        r.decomposition.f_value, r.decomposition.e_h, r.decomposition.lambda_coef,
                        r.decomposition.beta});
}

void write_stability_csv(std::ostream& out, const StabilityReport& report) {
  const std::size_t n = report.attractor.size();
  out << "sample";
  for (std::size_t i = 1; i <= n; ++i) out << ",v0_" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",vend_" << i;
  out << ",gap_to_equilibrium,excluded_zero\n";
  for (std::size_t k = 0; k < report.samples.size(); ++k) {
    const auto& s = report.samples[k];
    out << k;
    for (double x : s.v0) out << ',' << format_double(x);
    for (double x : s.v_end) out << ',' << format_double(x);
    out << ',' << format_double(s.gap_to_equilibrium) << ',' << (s.excluded_zero ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const PerturbationTable& table) {
  const std::size_t n = table.rows.empty() ? 0 : table.rows.front().v_bar.size();
  out << "eps";
  for (std::size_t i = 1; i <= n; ++i) out << ",vbar_" << i;
  out << ",distance,ratio,sigma,failed\n";
  for (const auto& r : table.rows) {
    out << format_double(r.eps);
    for (std::size_t i = 0; i < n; ++i) out << ',' << (i < r.v_bar.size() ? format_double(r.v_bar[i]) : "nan");
    out << ',' << format_double(r.distance) << ',' << format_double(r.ratio) << ',' << format_double(r.sigma)
        << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

const std::vector<std::string>& scenario_tasks() {
  static const std::vector<std::string> tasks{"validate", "simulate", "equilibrium", "spectrum",
                                              "entropy",  "rates",    "stability",   "sweep"};
  return tasks;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw InputError("", "scenario must be a JSON object");
  reject_unknown(j, {"model", "preset", "initial", "t_end", "rtol", "atol", "record_every", "outputs", "tasks",
                     "kernel", "method", "tail_fraction", "tol", "eps_grid", "perturbation", "force"},
                 "");
  Scenario sc;
  const bool has_model = j.contains("model");
  const bool has_preset = j.contains("preset");
  if (has_model == has_preset) throw InputError("model", "scenario needs exactly one of 'model' or 'preset'");
  if (has_model) {
    sc.model = model_from_json(j["model"], "model");
  } else {
    if (!j["preset"].is_string()) throw InputError("preset", "'preset' must be a string");
    sc.preset = j["preset"].get<std::string>();
    try {
      const Preset& p = find_preset(sc.preset);
      sc.model = p.model;
      sc.perturbation = p.perturbation;
    } catch (const std::out_of_range& e) {
      throw InputError("preset", e.what());
    }
  }

  if (j.contains("initial")) {
    const json& ji = j["initial"];
    if (ji.is_array()) {
      sc.initial = as_vector(ji, "initial");
    } else if (ji.is_object()) {
      reject_unknown(ji, {"count", "seed", "low", "high"}, "initial");
      SamplerSpec s;
      if (ji.contains("count")) {
        if (!ji["count"].is_number_integer() || ji["count"].get<long long>() < 1)
          throw InputError("initial.count", "'initial.count' must be a positive integer");
        s.count = ji["count"].get<std::size_t>();
      }
      if (ji.contains("seed")) {
        if (!ji["seed"].is_number_integer() || ji["seed"].get<long long>() < 0)
          throw InputError("initial.seed", "'initial.seed' must be a nonnegative integer");
        s.seed = ji["seed"].get<std::uint64_t>();
      }
      if (ji.contains("low")) s.low = as_number(ji["low"], "initial.low");
      if (ji.contains("high")) s.high = as_number(ji["high"], "initial.high");
      sc.sampler = s;
    } else {
      throw InputError("initial", "'initial' must be an array or a sampler object");
    }
  }
  auto positive = [&](const char* key) {
    const double x = as_number(j[key], key);
    if (!(x > 0.0)) throw InputError(key, std::string("'") + key + "' must be positive");
    return x;
  };
  if (j.contains("t_end")) sc.t_end = positive("t_end");
  if (j.contains("rtol")) sc.rtol = positive("rtol");
  if (j.contains("atol")) sc.atol = positive("atol");
  if (j.contains("record_every")) sc.record_every = positive("record_every");
  if (j.contains("tol")) sc.tol = positive("tol");
  if (j.contains("tail_fraction")) sc.tail_fraction = positive("tail_fraction");
  auto string_key = [&](const char* key, std::string& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw InputError(key, std::string("'") + key + "' must be a string");
    dst = j[key].get<std::string>();
  };
  string_key("outputs", sc.outputs);
  string_key("kernel", sc.kernel);
  string_key("method", sc.method);
  if (j.contains("force")) {
    if (!j["force"].is_boolean()) throw InputError("force", "'force' must be a boolean");
    sc.force = j["force"].get<bool>();
  }
  if (j.contains("eps_grid")) sc.eps_grid = as_vector(j["eps_grid"], "eps_grid");
  if (j.contains("perturbation")) {
    const json& jp = j["perturbation"];
    reject_unknown(jp, {"amp", "w"}, "perturbation");
    sc.perturbation = PerturbationSpec{as_vector(require(jp, "amp", "perturbation"), "perturbation.amp"),
                                       as_matrix(require(jp, "w", "perturbation"), "perturbation.w")};
  }
  if (j.contains("tasks")) {
    const json& jt = j["tasks"];
    if (!jt.is_array()) throw InputError("tasks", "'tasks' must be an array of task names");
    for (std::size_t k = 0; k < jt.size(); ++k) {
      const std::string key = "tasks[" + std::to_string(k) + "]";
      if (!jt[k].is_string()) throw InputError(key, "'" + key + "' must be a string");
      const std::string t = jt[k].get<std::string>();
      const auto& known = scenario_tasks();
      if (std::find(known.begin(), known.end(), t) == known.end())
        throw InputError(key, "unknown task '" + t + "'");
      sc.tasks.push_back(t);
    }
  }
  return sc;
}

}  // namespace lvmut
