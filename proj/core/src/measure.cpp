#include "hanoi/measure.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "hanoi/errors.hpp"

namespace hanoi {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += (std::abs(sum_) >= std::abs(x)) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double beta_bound(double alpha) {
  (void)Params{alpha};
  const double b = 2.0 / (3.0 * (1.0 - alpha));
  return b * b;
}

void validate_beta(double alpha, double beta) {
  const double bound = beta_bound(alpha);
  if (!(beta > 0.0 && beta < bound)) {
    std::ostringstream msg;
    msg << std::setprecision(6) << "beta must satisfy 0 < beta < (2/(3(1-alpha)))^2 = " << bound
        << " for alpha = " << alpha << ", got " << beta;
    throw InvalidParameter(msg.str());
  }
}

MeasureParams::MeasureParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  validate_beta(alpha, beta);
}

double continuous_normalizer(const MeasureParams& params) {
  return 3.0 * params.alpha() / (1.0 - params.q());
}

double segment_mass(const MeasureParams& params, int k) {
  return std::pow(params.beta(), k - 1) * segment_length(params.alpha(), k) /
         (2.0 * continuous_normalizer(params));
}

MassVector assemble_mass(const Mesh& mesh, const MeasureParams& params) {
  if (mesh.params().alpha() != params.alpha()) {
    throw InvalidParameter("measure parameters were built for a different alpha than the mesh");
  }
  MassVector out;
  out.masses.assign(mesh.node_count(), 0.0);

  const double corner_mass = (1.0 / 6.0) * std::pow(3.0, -mesh.level());
  CompensatedSum discrete;
  for (std::size_t i = 0; i < mesh.corner_count(); ++i) {
    out.masses[i] = corner_mass;
    discrete.add(corner_mass);
  }

  CompensatedSum continuous;
  const double pieces = mesh.subdiv();
  for (const auto& s : mesh.segments()) {
    const double total = segment_mass(params, s.level);
    const double half = 0.5 * total / pieces;
    std::size_t prev = s.a;
    for (auto id : s.interior) {
      out.masses[prev] += half;
      out.masses[id] += half;
      prev = id;
    }
    out.masses[prev] += half;
    out.masses[s.b] += half;
    continuous.add(total);
  }
  out.discrete_total = discrete.value();
  out.continuous_total = continuous.value();
  return out;
}

}  // namespace hanoi
