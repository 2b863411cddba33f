#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hanoi/forms.hpp"
#include "hanoi/measure.hpp"

namespace hanoi {

enum class Boundary { Neumann, Dirichlet };

std::string_view to_string(Boundary bc);
Boundary boundary_from_string(std::string_view name);

/// Parameters a spectrum was computed from.
struct Provenance {
  double alpha = 0.0;
  double beta = 0.0;
  int level = 0;
  int subdiv = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Generalized problem K u = kappa M u with diagonal M. Dirichlet problems delete the
/// clamped rows and columns; Neumann problems keep every node and have the constants
/// as their kernel.
class EigenProblem {
 public:
  EigenProblem(const EnergyForm& form, const MassVector& mass, Boundary bc, Provenance provenance);

  /// Sub-network induced on `nodes` with `clamped` nodes deleted (Dirichlet), e.g. a single
  /// segment with its two endpoints held at zero.
  static EigenProblem clamped_subgraph(const EnergyForm& form, const MassVector& mass,
                                       std::span<const std::size_t> nodes,
                                       std::span<const std::size_t> clamped, Provenance provenance);

  std::size_t dimension() const { return free_nodes_.size(); }
  Boundary bc() const { return bc_; }
  const Provenance& provenance() const { return provenance_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  /// Original node id of every unknown, ascending.
  const std::vector<std::size_t>& free_nodes() const { return free_nodes_; }

 private:
  EigenProblem(SparseMatrix stiffness, Eigen::VectorXd mass, std::vector<std::size_t> free_nodes,
               Boundary bc, Provenance provenance);

  SparseMatrix stiffness_;
  Eigen::VectorXd mass_;
  std::vector<std::size_t> free_nodes_;
  Boundary bc_;
  Provenance provenance_;
};

enum class SolverKind { Auto, Dense, Lanczos };

struct SolverOptions {
  SolverKind kind = SolverKind::Auto;
  /// Auto picks the dense route up to this dimension and block Lanczos above it.
  std::size_t dense_limit = 6000;
  /// Ritz pairs are accepted once ||residual|| <= tolerance * theta.
  double tolerance = 1e-10;
  std::size_t block_size = 8;
  std::uint64_t seed = 0x5eed'ca11'ab1eULL;
};

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending, with multiplicity
  Boundary bc = Boundary::Neumann;
  Provenance provenance;
};

/// The `count` smallest eigenvalues of the problem, ascending.
Spectrum solve_spectrum(const EigenProblem& problem, std::size_t count, const SolverOptions& options = {});

/// N(x) = #{kappa <= x}, counted with multiplicity.
std::size_t counting_function(const Spectrum& spectrum, double x);

/// (x, N(x)) at every distinct eigenvalue x.
std::vector<std::pair<double, std::size_t>> counting_samples(const Spectrum& spectrum);

/// kappa_j = (j pi)^2 * 2 mu~(J) / (rho^c_k beta^(k-1) d_k), j = 1..j_max: the interior modes of
/// one isolated level-k segment under the renormalized form and mu_{alpha,beta}.
std::vector<double> edge_mode_spectrum(const MeasureParams& params, int k, int j_max);

/// log 3 / log 5.
double weyl_exponent();

/// Fit window over the computed modes: drop the `drop_low` lowest and stop at
/// `high_fraction` of the computed count.
struct WindowPolicy {
  std::size_t drop_low = 20;
  double high_fraction = 0.8;
  std::size_t min_points = 100;
};

struct FitReport {
  double x_lo = 0.0;
  double x_hi = 0.0;
  std::size_t points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double d_s = 0.0;
  /// min and max of N(x) / x^(log3/log5) over the window.
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<double> residuals;  // log N - (intercept + slope log x)
};

FitReport spectral_dim_fit(const Spectrum& spectrum, const WindowPolicy& window = {});

struct WeylBracketReport {
  bool dirichlet_below_neumann = true;
  /// max over x of N_N(x) - N_D(x) and its minimum (should stay in [0, 3]).
  long long max_gap = 0;
  long long min_gap = 0;
  bool gap_within_boundary_rank = true;
  double x_max = 0.0;
  std::optional<FitReport> neumann_fit;
  std::optional<FitReport> dirichlet_fit;
};

/// Compares N_N and N_D on [0, largest computed Neumann eigenvalue]. Eigenvalues that agree
/// to `rel_tol` are treated as equal, so exact coincidences between the two spectra are not
/// reported as violations.
WeylBracketReport weyl_bracket_check(const Spectrum& neumann, const Spectrum& dirichlet,
                                     const WindowPolicy& window = {}, double rel_tol = 1e-9);

}  // namespace hanoi
