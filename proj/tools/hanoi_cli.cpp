// Batch front-end: `hanoi run` computes one experiment, `hanoi sweep` fans out over several.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hanoi/errors.hpp"
#include "hanoi/experiment.hpp"
#include "hanoi/io.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<int> level;
  std::optional<int> subdiv;
  std::optional<std::string> bc;
  std::optional<std::string> num_eigs;
  std::optional<long long> window_lo;
  std::optional<double> window_hi;
  std::optional<std::string> out;
  std::optional<std::string> solver;
  std::optional<unsigned long long> seed;
  bool emit_plot_data = false;
  bool no_dumps = false;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "JSON config file; flags override its keys");
  cmd.add_option("--alpha", o.alpha, "segment parameter, 0 < alpha < 1/3");
  cmd.add_option("--beta", o.beta, "segment weight, 0 < beta < (2/(3(1-alpha)))^2 (default: half the bound)");
  cmd.add_option("--level", o.level, "approximation level n");
  cmd.add_option("--subdiv", o.subdiv, "pieces per segment M");
  cmd.add_option("--bc", o.bc, "both | neumann | dirichlet");
  cmd.add_option("--num-eigs", o.num_eigs, "eigenvalues per boundary condition, or 'all'");
  cmd.add_option("--window-lo", o.window_lo, "lowest modes dropped from the fit (default 20)");
  cmd.add_option("--window-hi", o.window_hi, "fit window end as a fraction of computed modes (default 0.8)");
  cmd.add_option("--out", o.out, "output directory");
  cmd.add_option("--solver", o.solver, "auto | dense | lanczos");
  cmd.add_option("--seed", o.seed, "Lanczos start-block seed");
  cmd.add_flag("--emit-plot-data", o.emit_plot_data, "also write (log x, log N) pairs");
  cmd.add_flag("--no-dumps", o.no_dumps, "skip mesh, form and mass dumps");
}

nlohmann::json override_json(const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (o.alpha) j["alpha"] = *o.alpha;
  if (o.beta) j["beta"] = *o.beta;
  if (o.level) j["level"] = *o.level;
  if (o.subdiv) j["subdiv"] = *o.subdiv;
  if (o.bc) j["bc"] = *o.bc;
  if (o.num_eigs) {
    if (*o.num_eigs == "all") {
      j["num_eigs"] = "all";
    } else {
      try {
        j["num_eigs"] = std::stoll(*o.num_eigs);
      } catch (const std::exception&) {
        throw hanoi::InvalidParameter("--num-eigs expects a positive integer or 'all', got '" + *o.num_eigs + "'");
      }
    }
  }
  if (o.window_lo) j["window_lo"] = *o.window_lo;
  if (o.window_hi) j["window_hi"] = *o.window_hi;
  if (o.out) j["out"] = *o.out;
  if (o.solver) j["solver"] = *o.solver;
  if (o.seed) j["seed"] = *o.seed;
  if (o.emit_plot_data) j["emit_plot_data"] = true;
  if (o.no_dumps) {
    j["dump_mesh"] = false;
    j["dump_form"] = false;
    j["dump_mass"] = false;
  }
  return j;
}

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(hanoi::io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw hanoi::InvalidParameter("config " + path + " is not valid JSON: " + e.what());
  }
}

int cmd_run(const Overrides& o) {
  hanoi::ExperimentConfig config;
  if (!o.config.empty()) config = hanoi::config_from_json(load_json(o.config));
  config = hanoi::config_from_json(override_json(o), config);

  const hanoi::RunResult run = hanoi::run_experiment(config);
  std::printf("alpha %.6g  beta %.6g  level %d  subdiv %d  nodes %zu\n", config.alpha, run.beta, config.level,
              config.subdiv, run.node_count);
  for (const auto* s : {&run.neumann, &run.dirichlet}) {
    if (!*s) continue;
    const auto& ev = (*s)->eigenvalues;
    std::printf("%-9s %zu eigenvalues, lambda_0 = %.10g, largest = %.10g\n",
                std::string(hanoi::to_string((*s)->bc)).c_str(), ev.size(), ev.front(), ev.back());
  }
  if (run.bracket) {
    std::printf("N_N - N_D in [%lld, %lld] up to x = %.6g (%s)\n", run.bracket->min_gap, run.bracket->max_gap,
                run.bracket->x_max, run.bracket->gap_within_boundary_rank ? "ok" : "VIOLATED");
  }
  if (run.fit) {
    std::printf("fit: slope %.6f  d_S %.6f  (target %.6f)  c1 %.6g  c2 %.6g  over %zu modes\n", run.fit->slope,
                run.fit->d_s, 2.0 * hanoi::weyl_exponent(), run.fit->c1, run.fit->c2, run.fit->points);
  } else if (run.fit_skipped) {
    std::printf("fit skipped: %s\n", run.fit_skipped->c_str());
  }
  std::printf("wrote %zu files to %s\n", run.artifacts.size(), config.out_dir.string().c_str());
  return 0;
}

int cmd_sweep(const Overrides& o, const std::vector<double>& alphas, std::size_t jobs) {
  hanoi::ExperimentConfig base = hanoi::config_from_json(override_json(o));
  std::vector<hanoi::ExperimentConfig> configs;
  if (!o.config.empty()) configs = hanoi::sweep_from_json(load_json(o.config), base);
  for (double a : alphas) {
    hanoi::ExperimentConfig c = base;
    c.alpha = a;
    configs.push_back(c);
  }
  // Flags given on the command line win over per-run keys from the sweep file.
  if (!o.config.empty()) {
    for (auto& c : configs) c = hanoi::config_from_json(override_json(o), c);
  }

  const hanoi::SweepReport report = hanoi::run_sweep(configs, base.out_dir, jobs);
  std::printf("%-4s %-8s %-10s %-5s %-6s %-7s %-10s %-10s %-10s\n", "run", "alpha", "beta", "level", "subdiv",
              "status", "d_S", "c1", "c2");
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    const double beta = r.beta ? *r.beta : (r.config.beta ? *r.config.beta : 0.0);
    std::printf("%-4zu %-8.4g %-10.6g %-5d %-6d %-7s", i, r.config.alpha, beta, r.config.level, r.config.subdiv,
                r.ok ? "ok" : "failed");
    if (r.d_s) std::printf(" %-10.6f %-10.6g %-10.6g", *r.d_s, *r.c1, *r.c2);
    if (!r.ok) std::printf(" %s", r.error.c_str());
    std::printf("\n");
  }
  std::printf("wrote %s/sweep.csv and sweep.json\n", base.out_dir.string().c_str());
  if (report.all_ok()) return 0;
  for (const auto& r : report.rows) {
    if (!r.ok) return r.exit_code;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of graph approximations of the Hanoi attractor"};
  app.require_subcommand(1);

  Overrides run_opts;
  CLI::App* run = app.add_subcommand("run", "compute one experiment and write its artifacts");
  add_common(*run, run_opts);

  Overrides sweep_opts;
  std::vector<double> alphas;
  std::size_t jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "run several experiments and tabulate d_S, c1, c2");
  add_common(*sweep, sweep_opts);
  sweep->add_option("--alphas", alphas, "alpha values, each run with the other settings")->delimiter(',');
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (sweep_opts.config.empty() && alphas.empty()) {
      throw hanoi::InvalidParameter("sweep needs --config with a runs list or --alphas");
    }
    return cmd_sweep(sweep_opts, alphas, jobs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return hanoi::exit_code_for(e);
  }
}
