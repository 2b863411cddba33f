#include "hanoi/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "hanoi/errors.hpp"
#include "hanoi/forms.hpp"
#include "hanoi/geometry.hpp"
#include "hanoi/io.hpp"
#include "hanoi/measure.hpp"

namespace hanoi {

std::string_view to_string(BcSelection bc) {
  switch (bc) {
    case BcSelection::Both:
      return "both";
    case BcSelection::Neumann:
      return "neumann";
    case BcSelection::Dirichlet:
      return "dirichlet";
  }
  return "both";
}

BcSelection bc_selection_from_string(std::string_view name) {
  if (name == "both") return BcSelection::Both;
  if (name == "neumann") return BcSelection::Neumann;
  if (name == "dirichlet") return BcSelection::Dirichlet;
  throw InvalidParameter("bc must be one of both, neumann, dirichlet; got '" + std::string(name) + "'");
}

namespace {

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Auto:
      return "auto";
    case SolverKind::Dense:
      return "dense";
    case SolverKind::Lanczos:
      return "lanczos";
  }
  return "auto";
}

SolverKind solver_from_string(std::string_view name) {
  if (name == "auto") return SolverKind::Auto;
  if (name == "dense") return SolverKind::Dense;
  if (name == "lanczos") return SolverKind::Lanczos;
  throw InvalidParameter("solver must be one of auto, dense, lanczos; got '" + std::string(name) + "'");
}

std::vector<Boundary> selected(BcSelection bc) {
  switch (bc) {
    case BcSelection::Neumann:
      return {Boundary::Neumann};
    case BcSelection::Dirichlet:
      return {Boundary::Dirichlet};
    case BcSelection::Both:
      break;
  }
  return {Boundary::Neumann, Boundary::Dirichlet};
}

std::size_t dimension(std::size_t nodes, Boundary bc) { return bc == Boundary::Neumann ? nodes : nodes - 3; }

template <typename T>
T get_as(const nlohmann::json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidParameter("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

double default_beta(double alpha) { return 0.5 * beta_bound(alpha); }

double resolved_beta(const ExperimentConfig& config) {
  return config.beta ? *config.beta : default_beta(config.alpha);
}

std::size_t default_num_eigs(int level) {
  std::size_t cells = 1;
  for (int i = 0; i <= level; ++i) cells *= 3;
  return cells / 2;
}

std::size_t resolved_num_eigs(const ExperimentConfig& config, std::size_t dim) {
  if (config.all_eigs) return dim;
  if (config.num_eigs) return *config.num_eigs;
  return std::min(dim, default_num_eigs(config.level));
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base) {
  if (!j.is_object()) throw InvalidParameter("experiment config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "alpha") {
      base.alpha = get_as<double>(value, key);
    } else if (key == "beta") {
      if (value.is_null()) {
        base.beta.reset();
      } else {
        base.beta = get_as<double>(value, key);
      }
    } else if (key == "level") {
      base.level = get_as<int>(value, key);
    } else if (key == "subdiv") {
      base.subdiv = get_as<int>(value, key);
    } else if (key == "bc") {
      base.bc = bc_selection_from_string(get_as<std::string>(value, key));
    } else if (key == "num_eigs") {
      if (value.is_string() && value.get<std::string>() == "all") {
        base.all_eigs = true;
        base.num_eigs.reset();
      } else if (value.is_null()) {
        base.all_eigs = false;
        base.num_eigs.reset();
      } else {
        const auto n = get_as<long long>(value, key);
        if (n < 1) throw InvalidParameter("num_eigs must be at least 1, got " + std::to_string(n));
        base.all_eigs = false;
        base.num_eigs = static_cast<std::size_t>(n);
      }
    } else if (key == "window_lo") {
      const auto n = get_as<long long>(value, key);
      if (n < 0) throw InvalidParameter("window_lo must be nonnegative");
      base.window.drop_low = static_cast<std::size_t>(n);
    } else if (key == "window_hi") {
      base.window.high_fraction = get_as<double>(value, key);
    } else if (key == "out") {
      base.out_dir = get_as<std::string>(value, key);
    } else if (key == "emit_plot_data") {
      base.outputs.plot = get_as<bool>(value, key);
    } else if (key == "dump_mesh") {
      base.outputs.mesh = get_as<bool>(value, key);
    } else if (key == "dump_form") {
      base.outputs.form = get_as<bool>(value, key);
    } else if (key == "dump_mass") {
      base.outputs.mass = get_as<bool>(value, key);
    } else if (key == "solver") {
      base.solver.kind = solver_from_string(get_as<std::string>(value, key));
    } else if (key == "seed") {
      base.solver.seed = get_as<std::uint64_t>(value, key);
    } else {
      throw InvalidParameter("unknown config key '" + key + "'");
    }
  }
  return base;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json num_eigs = nullptr;
  if (config.all_eigs) {
    num_eigs = "all";
  } else if (config.num_eigs) {
    num_eigs = *config.num_eigs;
  }
  return {{"alpha", config.alpha},
          {"beta", config.beta ? nlohmann::json(*config.beta) : nlohmann::json(nullptr)},
          {"level", config.level},
          {"subdiv", config.subdiv},
          {"bc", to_string(config.bc)},
          {"num_eigs", num_eigs},
          {"window_lo", config.window.drop_low},
          {"window_hi", config.window.high_fraction},
          {"out", config.out_dir.generic_string()},
          {"emit_plot_data", config.outputs.plot},
          {"dump_mesh", config.outputs.mesh},
          {"dump_form", config.outputs.form},
          {"dump_mass", config.outputs.mass},
          {"solver", solver_name(config.solver.kind)},
          {"seed", config.solver.seed}};
}

void validate(const ExperimentConfig& config) {
  const Params params(config.alpha);
  validate_beta(params.alpha(), resolved_beta(config));
  if (config.level < 0 || config.level > kMaxLevel) {
    throw InvalidParameter("level must satisfy 0 <= level <= " + std::to_string(kMaxLevel) + ", got " +
                           std::to_string(config.level));
  }
  if (config.subdiv < 1) throw InvalidParameter("subdiv must be at least 1, got " + std::to_string(config.subdiv));
  if (!(config.window.high_fraction > 0.0 && config.window.high_fraction <= 1.0)) {
    throw InvalidParameter("window_hi must lie in (0, 1]");
  }
  const std::size_t nodes = mesh_node_count(config.level, config.subdiv);
  for (Boundary bc : selected(config.bc)) {
    const std::size_t dim = dimension(nodes, bc);
    if (dim == 0) {
      throw InvalidParameter("the level-0 Dirichlet problem has no unknowns");
    }
    if (config.num_eigs && *config.num_eigs > dim) {
      throw InvalidParameter("num_eigs must not exceed the " + std::string(to_string(bc)) + " dimension " +
                             std::to_string(dim) + ", got " + std::to_string(*config.num_eigs));
    }
  }
  if (config.num_eigs && *config.num_eigs == 0) throw InvalidParameter("num_eigs must be at least 1");
}

RunResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  RunResult result;
  result.beta = resolved_beta(config);

  const auto& dir = config.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto emit = [&](const std::string& name, const std::string& text) {
    io::write_text(dir / name, text);
    result.artifacts.push_back(dir / name);
  };
  auto emit_json = [&](const std::string& name, const nlohmann::json& value) { emit(name, value.dump(2) + "\n"); };

  nlohmann::json resolved = config_to_json(config);
  resolved["beta"] = result.beta;
  emit_json("config.json", resolved);

  const Params params(config.alpha);
  const MeasureParams measure(config.alpha, result.beta);
  const Mesh mesh = build_mesh(params, config.level, config.subdiv);
  result.node_count = mesh.node_count();
  const RenormFactors factors = renorm_factors(params, config.level);
  const EnergyForm form = assemble_energy(mesh, factors);
  const MassVector mass = assemble_mass(mesh, measure);

  if (config.outputs.mesh) emit_json("mesh.json", io::mesh_json(mesh));
  if (config.outputs.form) {
    std::ostringstream csv;
    io::write_form_csv(csv, form);
    emit("form.csv", csv.str());
    emit_json("form.json", io::form_header(mesh, factors));
  }
  if (config.outputs.mass) {
    std::ostringstream csv;
    io::write_mass_csv(csv, mass);
    emit("mass.csv", csv.str());
    emit_json("mass.json", io::mass_header(measure, mass));
  }

  const Provenance provenance{config.alpha, result.beta, config.level, config.subdiv};
  for (Boundary bc : selected(config.bc)) {
    const EigenProblem problem(form, mass, bc, provenance);
    Spectrum spectrum = solve_spectrum(problem, resolved_num_eigs(config, problem.dimension()), config.solver);
    const std::string suffix(to_string(bc));
    std::ostringstream spec_csv, count_csv;
    io::write_spectrum_csv(spec_csv, spectrum);
    io::write_counting_csv(count_csv, spectrum);
    emit("spectrum_" + suffix + ".csv", spec_csv.str());
    emit("counting_" + suffix + ".csv", count_csv.str());
    if (config.outputs.plot) {
      std::ostringstream plot_csv;
      io::write_plot_csv(plot_csv, spectrum);
      emit("plot_" + suffix + ".csv", plot_csv.str());
    }
    (bc == Boundary::Neumann ? result.neumann : result.dirichlet) = std::move(spectrum);
  }

  if (result.neumann && result.dirichlet) {
    result.bracket = weyl_bracket_check(*result.neumann, *result.dirichlet, config.window);
  }
  const Spectrum& primary = result.neumann ? *result.neumann : *result.dirichlet;
  try {
    result.fit = spectral_dim_fit(primary, config.window);
  } catch (const InvalidParameter& e) {
    result.fit_skipped = e.what();
  }
  if (result.fit) {
    nlohmann::json report = io::fit_json(*result.fit, config.window, result.bracket ? &*result.bracket : nullptr);
    report["bc"] = to_string(primary.bc);
    emit_json("fit_report.json", report);
  }
  return result;
}

bool SweepReport::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidParameter*>(&e) != nullptr) return 2;
  if (dynamic_cast<const SolverError*>(&e) != nullptr) return 3;
  return 1;
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c == '\n' ? ' ' : c;
  }
  return quoted + "\"";
}

std::string optional_number(const std::optional<double>& x) { return x ? io::format_double(*x) : std::string(); }

nlohmann::json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

}  // namespace

SweepReport run_sweep(std::vector<ExperimentConfig> configs, const std::filesystem::path& out_dir, std::size_t jobs) {
  if (configs.empty()) throw InvalidParameter("sweep needs at least one config");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  SweepReport report;
  report.rows.resize(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", i);
    configs[i].out_dir = out_dir / name;
    report.rows[i].config = configs[i];
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      SweepRow& row = report.rows[i];
      try {
        const RunResult run = run_experiment(configs[i]);
        row.ok = true;
        row.beta = run.beta;
        if (run.fit) {
          row.d_s = run.fit->d_s;
          row.c1 = run.fit->c1;
          row.c2 = run.fit->c2;
        }
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.exit_code = exit_code_for(e);
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, configs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::ostringstream csv;
  csv << "run,alpha,beta,level,subdiv,status,d_s,c1,c2,error\n";
  nlohmann::json rows = nlohmann::json::array();
  std::optional<double> lo, hi;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const SweepRow& r = report.rows[i];
    const std::optional<double> beta = r.beta ? r.beta : r.config.beta;
    csv << i << ',' << io::format_double(r.config.alpha) << ',' << optional_number(beta) << ',' << r.config.level
        << ',' << r.config.subdiv << ',' << (r.ok ? "ok" : "failed") << ',' << optional_number(r.d_s) << ','
        << optional_number(r.c1) << ',' << optional_number(r.c2) << ',' << csv_field(r.error) << '\n';
    rows.push_back({{"run", i},
                    {"alpha", r.config.alpha},
                    {"beta", optional_json(beta)},
                    {"level", r.config.level},
                    {"subdiv", r.config.subdiv},
                    {"status", r.ok ? "ok" : "failed"},
                    {"d_s", optional_json(r.d_s)},
                    {"c1", optional_json(r.c1)},
                    {"c2", optional_json(r.c2)},
                    {"error", r.error}});
    if (r.d_s) {
      lo = lo ? std::min(*lo, *r.d_s) : *r.d_s;
      hi = hi ? std::max(*hi, *r.d_s) : *r.d_s;
    }
  }
  io::write_text(out_dir / "sweep.csv", csv.str());
  nlohmann::json summary = {{"rows", std::move(rows)},
                            {"target_d_s", 2.0 * weyl_exponent()},
                            {"d_s_spread", lo ? nlohmann::json(*hi - *lo) : nlohmann::json(nullptr)}};
  io::write_json(out_dir / "sweep.json", summary);
  return report;
}

std::vector<ExperimentConfig> sweep_from_json(const nlohmann::json& j, const ExperimentConfig& base) {
  const nlohmann::json* runs = &j;
  ExperimentConfig defaults = base;
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (key != "defaults" && key != "runs") throw InvalidParameter("unknown sweep key '" + key + "'");
    }
    if (j.contains("defaults")) defaults = config_from_json(j.at("defaults"), base);
    if (!j.contains("runs")) throw InvalidParameter("sweep file needs a 'runs' array");
    runs = &j.at("runs");
  }
  if (!runs->is_array()) throw InvalidParameter("sweep runs must be a JSON array");
  std::vector<ExperimentConfig> out;
  for (const auto& run : *runs) out.push_back(config_from_json(run, defaults));
  return out;
}

}  // namespace hanoi
