#pragma once

#include <cstddef>
#include <vector>

#include "hanoi/geometry.hpp"

namespace hanoi {

/// Upper bound (2 / (3 (1 - alpha)))^2 for the segment weight beta.
double beta_bound(double alpha);

/// Throws InvalidParameter unless 0 < beta < beta_bound(alpha); the message names the bound.
void validate_beta(double alpha, double beta);

/// Validated (alpha, beta) pair for the measure mu_{alpha,beta}.
class MeasureParams {
 public:
  MeasureParams(double alpha, double beta);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  /// Geometric ratio q = 3 beta (1 - alpha) / 2 < 1 of the segment masses per level.
  double q() const { return 1.5 * beta_ * (1.0 - alpha_); }

 private:
  double alpha_;
  double beta_;
};

/// Total unnormalized segment mass sum_k 3^k beta^(k-1) d_k = 3 alpha / (1 - q).
double continuous_normalizer(const MeasureParams& params);

/// Mass of a single level-k segment, beta^(k-1) d_k / (2 * normalizer).
double segment_mass(const MeasureParams& params, int k);

struct MassVector {
  std::vector<double> masses;
  double discrete_total = 0.0;
  double continuous_total = 0.0;

  double total() const { return discrete_total + continuous_total; }
};

/// Lumped mu_{alpha,beta}: each cell corner gets (1/6) 3^-n, each level-k segment's mass is
/// spread over its M pieces with half of every piece on each end node.
MassVector assemble_mass(const Mesh& mesh, const MeasureParams& params);

}  // namespace hanoi
