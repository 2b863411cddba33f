#pragma once

#include <cstddef>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hanoi/spectral.hpp"

namespace hanoi {

enum class BcSelection { Both, Neumann, Dirichlet };

std::string_view to_string(BcSelection bc);
BcSelection bc_selection_from_string(std::string_view name);

struct OutputSelection {
  bool mesh = true;
  bool form = true;
  bool mass = true;
  bool plot = false;
};

struct ExperimentConfig {
  double alpha = 0.25;
  /// Defaults to half the admissible bound, 0.5 (2 / (3 (1 - alpha)))^2.
  std::optional<double> beta;
  int level = 4;
  int subdiv = 2;
  BcSelection bc = BcSelection::Both;
  /// Defaults to min(dim, floor(3^(level+1) / 2)); `all_eigs` requests the full spectrum.
  std::optional<std::size_t> num_eigs;
  bool all_eigs = false;
  WindowPolicy window;
  std::filesystem::path out_dir = "hanoi_out";
  OutputSelection outputs;
  SolverOptions solver;
};

inline constexpr int kMaxLevel = 10;

double default_beta(double alpha);
double resolved_beta(const ExperimentConfig& config);
std::size_t default_num_eigs(int level);
std::size_t resolved_num_eigs(const ExperimentConfig& config, std::size_t dimension);

/// Reads the keys of `j` on top of `base`; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Throws InvalidParameter naming the violated bound; runs before any computation.
void validate(const ExperimentConfig& config);

struct RunResult {
  double beta = 0.0;
  std::size_t node_count = 0;
  std::optional<Spectrum> neumann;
  std::optional<Spectrum> dirichlet;
  /// Fit of the Neumann spectrum when computed, otherwise of the Dirichlet one; empty when
  /// the window holds too few eigenvalues.
  std::optional<FitReport> fit;
  std::optional<std::string> fit_skipped;
  std::optional<WeylBracketReport> bracket;
  std::vector<std::filesystem::path> artifacts;
};

/// Builds the mesh, form, measure and spectra for `config` and writes every artifact into
/// config.out_dir. Rerunning an identical config reproduces byte-identical files.
RunResult run_experiment(const ExperimentConfig& config);

struct SweepRow {
  ExperimentConfig config;
  bool ok = false;
  std::string error;
  int exit_code = 0;
  std::optional<double> beta;
  std::optional<double> d_s;
  std::optional<double> c1;
  std::optional<double> c2;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool all_ok() const;
};

/// Runs each config in its own subdirectory run_NNN of `out_dir` on up to `jobs` threads.
/// A failing config is recorded in its row; the others still run. Writes sweep.csv and
/// sweep.json into `out_dir`.
SweepReport run_sweep(std::vector<ExperimentConfig> configs, const std::filesystem::path& out_dir, std::size_t jobs);

/// Sweep file: {"defaults": {...}, "runs": [{...}, ...]}; each run overrides the defaults.
std::vector<ExperimentConfig> sweep_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});

/// Exit status for an exception escaping a run: 2 invalid parameters, 3 solver failure, 1 other.
int exit_code_for(const std::exception& e);

}  // namespace hanoi
