#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hanoi/geometry.hpp"

namespace hanoi {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Per-level renormalization data for one alpha:
///   d_k   = alpha ((1-alpha)/2)^(k-1)
///   r^d_k = 3 / (5 + 3 d_k),   r^c_k = 3 d_k / (5 + 3 d_k)
///   rho^d_k = prod_{i<=k} r^d_i (rho^d_0 = 1),   rho^c_k = rho^d_{k-1} r^c_k
class RenormFactors {
 public:
  RenormFactors(double alpha, int max_level);

  double alpha() const { return alpha_; }
  int max_level() const { return max_level_; }

  double d(int k) const { return d_.at(k); }
  double rd(int k) const { return rd_.at(k); }
  double rc(int k) const { return rc_.at(k); }
  double rho_d(int k) const { return rho_d_.at(k); }
  double rho_c(int k) const { return rho_c_.at(k); }

  /// Level-(m -> m+1) harmonic-extension weights for the own, adjacent and opposite
  /// corner: ((2 + 3 d) , 2 , 1) / (5 + 3 d) with d = d_{m+1}.
  std::array<double, 3> extension_weights(int m) const;

 private:
  double alpha_;
  int max_level_;
  // Index 0 holds the level-0 convention (d_0 = 0, rho^d_0 = 1); r's and rho^c unused there.
  std::vector<double> d_, rd_, rc_, rho_d_, rho_c_;
};

RenormFactors renorm_factors(const Params& params, int max_level);

struct Conductance {
  std::size_t a = 0;
  std::size_t b = 0;
  double c = 0.0;
};

/// Quadratic form E[u] = sum_{edges} c_ab (u(a) - u(b))^2 on a finite node set, stored both
/// as an edge list and as the (symmetric, zero-row-sum) stiffness matrix.
class EnergyForm {
 public:
  EnergyForm(std::size_t node_count, std::vector<Conductance> edges,
             std::array<std::size_t, 3> boundary);

  std::size_t node_count() const { return node_count_; }
  const std::vector<Conductance>& edges() const { return edges_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const std::array<std::size_t, 3>& boundary() const { return boundary_; }

  double energy(std::span<const double> u) const;

 private:
  std::size_t node_count_;
  std::vector<Conductance> edges_;
  SparseMatrix stiffness_;
  std::array<std::size_t, 3> boundary_;
};

/// Renormalized level-n form: n-neighbor pairs carry 1/rho^d_n, each of the M pieces of a
/// level-k segment carries M/rho^c_k.
EnergyForm assemble_energy(const Mesh& mesh, const RenormFactors& factors);

/// Unrenormalized E_n: n-neighbor pairs carry 1, pieces of a level-k segment carry M/d_k.
EnergyForm assemble_raw_energy(const Mesh& mesh);

enum class ExtensionMethod { ClosedForm, Solve };

/// Harmonic extension of boundary values (u(p_1), u(p_2), u(p_3)) to every mesh node.
std::vector<double> harmonic_extension(const std::array<double, 3>& boundary_values, const Mesh& mesh,
                                       const RenormFactors& factors, ExtensionMethod method);

/// Energy minimizer with prescribed values on `fixed` nodes (direct sparse solve).
std::vector<double> minimize_energy(const EnergyForm& form, std::span<const std::size_t> fixed,
                                    std::span<const double> fixed_values);

/// Trace of a form onto a node subset: the Schur complement K_kk - K_ki K_ii^{-1} K_ik.
struct TracedForm {
  std::vector<std::size_t> nodes;
  Eigen::MatrixXd matrix;

  double energy(std::span<const double> v) const;
  /// Conductance between local indices i != j, i.e. -matrix(i, j).
  double conductance(std::size_t i, std::size_t j) const { return -matrix(i, j); }
};

TracedForm trace_to_boundary(const EnergyForm& form, std::span<const std::size_t> keep);

/// Two-point effective resistance sup |u(a)-u(b)|^2 / E[u]; zero when a == b.
double effective_resistance(const EnergyForm& form, std::size_t a, std::size_t b);

/// Smallest C with |u(x)-u(y)| <= C E[u]^{1/2} |x-y|^{exponent} over all node pairs.
double holder_constant(const Mesh& mesh, std::span<const double> u, double energy, double exponent);

}  // namespace hanoi
