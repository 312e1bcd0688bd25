#include "lvmut/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lvmut/acceptance.hpp"
#include "lvmut/analysis.hpp"
#include "lvmut/entropy.hpp"
#include "lvmut/errors.hpp"
#include "lvmut/presets.hpp"
#include "lvmut/serialize.hpp"

namespace lvmut {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const Vector kDefaultEpsGrid{1e-4, 4e-4, 1.6e-3, 6.4e-3};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Values collected from the command line; unset optionals defer to the scenario.
struct Flags {
  std::string scenario_file;
  std::string preset;
  std::string out;
  std::optional<double> t_end, rtol, atol, record_every, tol, tail;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::string initial;
  std::string kernel;
  std::string method;
  std::string eps;
  bool force = false;
  unsigned threads = 0;
  bool list = false;
};

Vector parse_list(const std::string& text, const char* flag) {
  Vector v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(flag, std::string("bad number '") + item + "' in " + flag);
    }
  }
  if (v.empty()) throw InputError(flag, std::string(flag) + " needs a comma-separated list of numbers");
  return v;
}

Scenario load_scenario(const Flags& f) {
  Scenario sc;
  if (!f.scenario_file.empty()) {
    std::ifstream in(f.scenario_file);
    if (!in) throw InputError("scenario", "cannot open scenario file '" + f.scenario_file + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InputError("<document>", std::string("malformed JSON: ") + e.what());
    }
    sc = scenario_from_json(doc);
    if (!f.preset.empty()) throw InputError("preset", "give either a scenario file or --preset, not both");
  } else if (!f.preset.empty()) {
    try {
      const Preset& p = find_preset(f.preset);
      sc.model = p.model;
      sc.preset = p.name;
      sc.perturbation = p.perturbation;
    } catch (const std::out_of_range& e) {
      throw InputError("preset", e.what());
    }
  } else {
    throw UsageError("a scenario file or --preset is required");
  }
  if (f.rtol) sc.rtol = *f.rtol;
  if (f.atol) sc.atol = *f.atol;
  if (f.record_every) sc.record_every = *f.record_every;
  if (f.t_end) sc.t_end = *f.t_end;
  if (f.tol) sc.tol = *f.tol;
  if (f.tail) sc.tail_fraction = *f.tail;
  if (!f.out.empty()) sc.outputs = f.out;
  if (!f.kernel.empty()) sc.kernel = f.kernel;
  if (!f.method.empty()) sc.method = f.method;
  if (!f.eps.empty()) sc.eps_grid = parse_list(f.eps, "--eps");
  if (!f.initial.empty()) sc.initial = parse_list(f.initial, "--initial");
  if (f.force) sc.force = true;
  if (f.seed || f.samples) {
    SamplerSpec s = sc.sampler.value_or(SamplerSpec{});
    if (f.seed) s.seed = *f.seed;
    if (f.samples) s.count = *f.samples;
    sc.sampler = s;
  }
  if (sc.initial && sc.initial->size() != sc.model.n)
    throw InputError("initial", "initial condition has the wrong length");
  return sc;
}

class Session {
 public:
  Session(Scenario sc, unsigned threads, std::ostream& out, std::ostream& err)
      : sc_(std::move(sc)), threads_(threads), out_(out), err_(err) {}

  const Scenario& scenario() const { return sc_; }

  void emit(const std::string& filename, const std::string& content) {
    if (sc_.outputs.empty()) {
      out_ << content;
      if (!content.empty() && content.back() != '\n') out_ << '\n';
      return;
    }
    fs::create_directories(sc_.outputs);
    const fs::path path = fs::path(sc_.outputs) / filename;
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot write '" + path.string() + "'");
    file << content;
    if (!content.empty() && content.back() != '\n') file << '\n';
  }

  IntegrateOptions integrate_options() const {
    IntegrateOptions o;
    o.rtol = sc_.rtol;
    o.atol = sc_.atol;
    o.record_every = sc_.record_every;
    return o;
  }

  Vector initial_condition() const {
    if (sc_.initial) return *sc_.initial;
    const SamplerSpec s = sc_.sampler.value_or(SamplerSpec{});
    const double high = s.high < 0.0 ? 2.0 * sc_.model.big_k : s.high;
    return sample_initial_conditions(sc_.model.n, 1, s.seed, s.low, high).front();
  }

  const EquilibriumResult& equilibrium() {
    if (!eq_) {
      const std::string& m = sc_.method;
      if (m == "perron") {
        eq_ = equilibrium_uniform(sc_.model);
      } else if (m == "homotopy") {
        eq_ = equilibrium_homotopy(sc_.model);
      } else if (m == "auto") {
        eq_ = equilibrium_auto(sc_.model);
      } else {
        throw InputError("method", "method must be perron, homotopy or auto");
      }
    }
    return *eq_;
  }

  const Trajectory& trajectory(double default_t_end) {
    if (!traj_) traj_ = integrate(sc_.model, initial_condition(), sc_.t_end.value_or(default_t_end),
                                  integrate_options());
    return *traj_;
  }

  bool task_validate(json& report) {
    const HypothesisReport rep = validate(sc_.model);
    report = to_json(rep);
    return rep.h1_to_h3();
  }

  void task_simulate() {
    std::ostringstream os;
    write_trajectory_csv(os, trajectory(50.0));
    emit("trajectory.csv", os.str());
  }

  void task_equilibrium() { emit("equilibrium.json", to_json(equilibrium()).dump(2)); }

  void task_spectrum() { emit("spectrum.json", to_json(spectral_gap(sc_.model, equilibrium().v_bar)).dump(2)); }

  void task_entropy() {
    EntropyKernel kernel;
    try {
      kernel = parse_kernel(sc_.kernel);
    } catch (const Error& e) {
      throw InputError("kernel", e.what());
    }
    std::ostringstream os;
    write_entropy_csv(os, entropy_diagnostics(sc_.model, trajectory(50.0), equilibrium().v_bar, kernel));
    emit("entropy.csv", os.str());
  }

  json task_rates() {
    const Vector& v_bar = equilibrium().v_bar;
    const double c1 = spectral_gap(sc_.model, v_bar).c1;
    return to_json(convergence_rate(trajectory(50.0), v_bar, sc_.tail_fraction, c1));
  }

  json task_stability(const std::string& csv_name) {
    StabilityOptions o;
    o.t_end = sc_.t_end.value_or(200.0);
    o.tol = sc_.tol;
    o.force = sc_.force;
    o.integrate = integrate_options();
    o.integrate.record_every = o.t_end / 10.0;
    o.threads = threads_;
    if (sc_.initial) {
      o.initial = {*sc_.initial};
    } else {
      const SamplerSpec s = sc_.sampler.value_or(SamplerSpec{20, 1, 0.0, -1.0});
      o.n_samples = s.count;
      o.seed = s.seed;
      o.low = s.low;
      o.high = s.high;
    }
    const StabilityReport rep = global_stability_experiment(sc_.model, o);
    if (!rep.in_scope)
      err_ << "WARNING: OUT OF THEOREM SCOPE, forced run (" << rep.scope_note << ")\n";
    std::ostringstream os;
    write_stability_csv(os, rep);
    if (!sc_.outputs.empty()) emit(csv_name, os.str());
    return to_json(rep);
  }

  json task_sweep(const std::string& csv_name) {
    Model base = sc_.model;
    std::optional<PerturbationSpec> spec = sc_.perturbation;
    if (const auto* p = std::get_if<Perturbed>(&sc_.model.interaction)) {
      base = build_model(base.n, base.r, base.big_k, base.mu, p->base);
      if (!spec) spec = PerturbationSpec{p->amp, p->w};
    }
    if (!spec) throw InputError("perturbation", "sweep needs a perturbation {amp, w} or a perturbed model");
    const Vector grid = sc_.eps_grid.empty() ? kDefaultEpsGrid : sc_.eps_grid;
    const PerturbationTable table = perturbation_sweep(base, *spec, grid, threads_);
    std::ostringstream os;
    write_sweep_csv(os, table);
    if (!sc_.outputs.empty()) emit(csv_name, os.str());
    return to_json(table);
  }

 private:
  Scenario sc_;
  unsigned threads_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<EquilibriumResult> eq_;
  std::optional<Trajectory> traj_;
};

void error_json(std::ostream& err, const std::string& code, const std::string& message, const std::string& key = "") {
  json j{{"error", code}, {"message", message}};
  if (!key.empty()) j["key"] = key;
  err << j.dump() << '\n';
}

void add_source_options(CLI::App* sub, Flags& f) {
  sub->add_option("scenario", f.scenario_file, "Scenario JSON file");
  sub->add_option("--preset", f.preset, "Use a built-in preset instead of a scenario file");
  sub->add_option("--out", f.out, "Directory for output files (default: print to stdout)");
}

void add_sim_options(CLI::App* sub, Flags& f) {
  sub->add_option("--t-end", f.t_end, "Integration horizon");
  sub->add_option("--rtol", f.rtol, "Relative tolerance");
  sub->add_option("--atol", f.atol, "Absolute tolerance");
  sub->add_option("--record-every", f.record_every, "Maximum spacing of recorded states");
  sub->add_option("--initial", f.initial, "Initial condition as comma-separated values");
  sub->add_option("--seed", f.seed, "Seed for sampled initial conditions");
}

int run_verify(const Flags& f, std::ostream& out) {
  const auto& all = acceptance_criteria();
  if (f.list) {
    for (const auto& c : all) out << "C" << c.id << ' ' << c.name << '\n';
    return kExitOk;
  }
  if (!f.preset.empty()) out << "note: criteria run on their own fixed presets; --preset is not used\n";
  std::size_t passed = 0;
  for (const auto& c : all) {
    const CriterionResult r = c.run();
    passed += r.passed ? 1 : 0;
    out << format_result_line(r) << '\n';
  }
  out << passed << '/' << all.size() << " criteria passed\n";
  return passed == all.size() ? kExitOk : kExitCheckFailed;
}

int run_presets(std::ostream& out) {
  for (const auto& p : presets()) out << p.name << "\t" << p.description << "\t(" << p.realizes << ")\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lotka-Volterra competition with mutation: simulation, equilibria and stability diagnostics", "lvmut"};
  app.require_subcommand(1);
  Flags f;

  auto* validate_cmd = app.add_subcommand("validate", "Check the model hypotheses (exit 0 iff H1-H3 hold)");
  add_source_options(validate_cmd, f);

  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate the model and write trajectory.csv");
  add_source_options(simulate_cmd, f);
  add_sim_options(simulate_cmd, f);

  auto* equilibrium_cmd = app.add_subcommand("equilibrium", "Compute the positive equilibrium");
  add_source_options(equilibrium_cmd, f);
  equilibrium_cmd->add_option("--method", f.method, "perron, homotopy or auto")
      ->check(CLI::IsMember({"perron", "homotopy", "auto"}));

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Spectral gap of D - Mtilde at the equilibrium");
  add_source_options(spectrum_cmd, f);

  auto* entropy_cmd = app.add_subcommand("entropy", "Relative entropy diagnostics along a trajectory");
  add_source_options(entropy_cmd, f);
  add_sim_options(entropy_cmd, f);
  entropy_cmd->add_option("--kernel", f.kernel, "linear, quadratic or poly:c0,c1,...")->required();

  auto* rates_cmd = app.add_subcommand("rates", "Fitted exponential convergence rates");
  add_source_options(rates_cmd, f);
  add_sim_options(rates_cmd, f);
  rates_cmd->add_option("--tail", f.tail, "Fraction of the time span used for the fit");

  auto* stability_cmd = app.add_subcommand("stability", "Global stability experiment from random starts");
  add_source_options(stability_cmd, f);
  add_sim_options(stability_cmd, f);
  stability_cmd->add_option("--samples", f.samples, "Number of random starts");
  stability_cmd->add_option("--tol", f.tol, "Gap tolerance");
  stability_cmd->add_flag("--force", f.force, "Run even outside theorem scope");
  stability_cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Perturbation sweep over eps");
  add_source_options(sweep_cmd, f);
  sweep_cmd->add_option("--eps", f.eps, "Comma-separated ascending eps grid");
  sweep_cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");

  auto* run_cmd = app.add_subcommand("run", "Run every task listed in a scenario file");
  add_source_options(run_cmd, f);
  run_cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");

  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  verify_cmd->add_flag("--list", f.list, "List the criteria without running them");
  verify_cmd->add_option("--preset", f.preset, "Accepted for compatibility; criteria use fixed presets");

  app.add_subcommand("presets", "List the built-in presets");

  std::vector<std::string> argv_store{"lvmut"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_json(err, "UsageError", e.what());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "verify") return run_verify(f, out);
  if (name == "presets") return run_presets(out);

  std::optional<Session> session;
  try {
    session.emplace(load_scenario(f), f.threads, out, err);
    if (name == "run") {
      if (session->scenario().tasks.empty()) throw InputError("tasks", "scenario lists no tasks");
      if (session->scenario().outputs.empty()) throw InputError("outputs", "run needs 'outputs' or --out");
    }
  } catch (const InputError& e) {
    error_json(err, "InputError", e.what(), e.key());
    return kExitUsage;
  } catch (const UsageError& e) {
    error_json(err, "UsageError", e.what());
    return kExitUsage;
  }

  try {
    int code = kExitOk;
    auto one = [&](const std::string& task, json* report, const std::string& suffix) {
      if (task == "validate") {
        json r;
        if (!session->task_validate(r)) code = kExitCheckFailed;
        if (report) (*report)["validate"] = r; else session->emit("report.json", r.dump(2));
      } else if (task == "simulate") {
        session->task_simulate();
      } else if (task == "equilibrium") {
        session->task_equilibrium();
      } else if (task == "spectrum") {
        session->task_spectrum();
      } else if (task == "entropy") {
        session->task_entropy();
      } else if (task == "rates") {
        const json r = session->task_rates();
        if (report) (*report)["rates"] = r; else session->emit("report.json", r.dump(2));
      } else if (task == "stability") {
        const json r = session->task_stability(suffix.empty() ? "report.csv" : "stability.csv");
        if (report) (*report)["stability"] = r; else session->emit("report.json", r.dump(2));
      } else if (task == "sweep") {
        const json r = session->task_sweep(suffix.empty() ? "report.csv" : "sweep.csv");
        if (report) (*report)["sweep"] = r; else session->emit("report.json", r.dump(2));
      }
    };
    if (name == "run") {
      json report = json::object();
      for (const auto& task : session->scenario().tasks) one(task, &report, "run");
      if (!report.empty()) session->emit("report.json", report.dump(2));
    } else {
      one(name, nullptr, "");
    }
    return code;
  } catch (const InputError& e) {
    error_json(err, "InputError", e.what(), e.key());
    return kExitUsage;
  } catch (const UsageError& e) {
    error_json(err, "UsageError", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    error_json(err, std::string(to_string(e.code())), e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    error_json(err, "InternalError", e.what());
    return kExitSolver;
  }
}

}  // namespace lvmut
