#include "hanoi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "eigensolvers.hpp"
#include "hanoi/errors.hpp"

namespace hanoi {

std::string_view to_string(Boundary bc) {
  return bc == Boundary::Neumann ? "neumann" : "dirichlet";
}

Boundary boundary_from_string(std::string_view name) {
  if (name == "neumann") return Boundary::Neumann;
  if (name == "dirichlet") return Boundary::Dirichlet;
  throw InvalidParameter("unknown boundary condition '" + std::string(name) + "'");
}

namespace {

// Sub-network on the `free` nodes: edges inside it keep their weight, edges to `clamped`
// nodes contribute only to the diagonal, all other edges are dropped.
SparseMatrix restrict_form(const EnergyForm& form, const std::vector<std::size_t>& free,
                           const std::vector<char>& is_clamped) {
  constexpr auto none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> local(form.node_count(), none);
  for (std::size_t i = 0; i < free.size(); ++i) local[free[i]] = i;

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(4 * form.edges().size());
  for (const Conductance& e : form.edges()) {
    const std::size_t la = local[e.a];
    const std::size_t lb = local[e.b];
    const auto ia = static_cast<int>(la);
    const auto ib = static_cast<int>(lb);
    if (la != none && lb != none) {
      triplets.emplace_back(ia, ia, e.c);
      triplets.emplace_back(ib, ib, e.c);
      triplets.emplace_back(ia, ib, -e.c);
      triplets.emplace_back(ib, ia, -e.c);
    } else if (la != none && is_clamped[e.b]) {
      triplets.emplace_back(ia, ia, e.c);
    } else if (lb != none && is_clamped[e.a]) {
      triplets.emplace_back(ib, ib, e.c);
    }
  }
  const auto n = static_cast<int>(free.size());
  SparseMatrix k(n, n);
  k.setFromTriplets(triplets.begin(), triplets.end());
  k.makeCompressed();
  return k;
}

Eigen::VectorXd gather(const MassVector& mass, const std::vector<std::size_t>& nodes) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) m(static_cast<Eigen::Index>(i)) = mass.masses[nodes[i]];
  return m;
}

void check_sizes(const EnergyForm& form, const MassVector& mass) {
  if (form.node_count() != mass.masses.size()) {
    throw InvalidParameter("energy form and mass vector belong to different meshes");
  }
}

}  // namespace

EigenProblem::EigenProblem(SparseMatrix stiffness, Eigen::VectorXd mass, std::vector<std::size_t> free_nodes,
                           Boundary bc, Provenance provenance)
    : stiffness_(std::move(stiffness)),
      mass_(std::move(mass)),
      free_nodes_(std::move(free_nodes)),
      bc_(bc),
      provenance_(provenance) {
  if (mass_.size() > 0 && !(mass_.minCoeff() > 0.0)) {
    throw InvalidParameter("mass must be positive at every node");
  }
}

EigenProblem::EigenProblem(const EnergyForm& form, const MassVector& mass, Boundary bc, Provenance provenance)
    : EigenProblem([&] {
        check_sizes(form, mass);
        std::vector<char> clamped(form.node_count(), 0);
        if (bc == Boundary::Dirichlet) {
          for (std::size_t b : form.boundary()) clamped[b] = 1;
        }
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < form.node_count(); ++i) {
          if (!clamped[i]) free.push_back(i);
        }
        SparseMatrix k = bc == Boundary::Neumann ? form.stiffness() : restrict_form(form, free, clamped);
        Eigen::VectorXd m = gather(mass, free);
        return EigenProblem(std::move(k), std::move(m), std::move(free), bc, provenance);
      }()) {}

EigenProblem EigenProblem::clamped_subgraph(const EnergyForm& form, const MassVector& mass,
                                            std::span<const std::size_t> nodes,
                                            std::span<const std::size_t> clamped, Provenance provenance) {
  check_sizes(form, mass);
  std::vector<char> in_set(form.node_count(), 0);
  std::vector<char> is_clamped(form.node_count(), 0);
  for (std::size_t v : nodes) in_set.at(v) = 1;
  for (std::size_t v : clamped) {
    if (!in_set.at(v)) throw InvalidParameter("clamped node outside the sub-network");
    is_clamped[v] = 1;
  }
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < form.node_count(); ++i) {
    if (in_set[i] && !is_clamped[i]) free.push_back(i);
  }
  SparseMatrix k = restrict_form(form, free, is_clamped);
  Eigen::VectorXd m = gather(mass, free);
  return EigenProblem(std::move(k), std::move(m), std::move(free), Boundary::Dirichlet, provenance);
}

Spectrum solve_spectrum(const EigenProblem& problem, std::size_t count, const SolverOptions& options) {
  const std::size_t dim = problem.dimension();
  if (count > dim) {
    throw InvalidParameter("requested " + std::to_string(count) + " eigenvalues but the problem has dimension " +
                           std::to_string(dim));
  }
  Spectrum out{{}, problem.bc(), problem.provenance()};
  if (count == 0) return out;

  const bool neumann = problem.bc() == Boundary::Neumann;
  const detail::Pencil pencil{problem.stiffness(), problem.mass(), neumann};
  const std::size_t rest = neumann ? count - 1 : count;

  SolverKind kind = options.kind;
  if (kind == SolverKind::Auto) kind = dim <= options.dense_limit ? SolverKind::Dense : SolverKind::Lanczos;
  std::vector<double> values = kind == SolverKind::Dense ? detail::dense_smallest(pencil, rest)
                                                         : detail::lanczos_smallest(pencil, rest, options);
  if (neumann) {
    // The constants are an exact null vector of a zero-row-sum form.
    out.eigenvalues.push_back(0.0);
  }
  out.eigenvalues.insert(out.eigenvalues.end(), values.begin(), values.end());
  return out;
}

std::size_t counting_function(const Spectrum& spectrum, double x) {
  const auto& ev = spectrum.eigenvalues;
  return static_cast<std::size_t>(std::upper_bound(ev.begin(), ev.end(), x) - ev.begin());
}

std::vector<std::pair<double, std::size_t>> counting_samples(const Spectrum& spectrum) {
  std::vector<std::pair<double, std::size_t>> out;
  const auto& ev = spectrum.eigenvalues;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (i + 1 < ev.size() && ev[i + 1] == ev[i]) continue;
    out.emplace_back(ev[i], i + 1);
  }
  return out;
}

std::vector<double> edge_mode_spectrum(const MeasureParams& params, int k, int j_max) {
  if (k < 1) throw InvalidParameter("segment level must be at least 1");
  if (j_max < 0) throw InvalidParameter("mode count must be nonnegative");
  const RenormFactors factors(params.alpha(), k);
  const double ratio = 1.0 / (factors.rho_c(k) * segment_mass(params, k));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(j_max));
  for (int j = 1; j <= j_max; ++j) {
    const double w = j * std::numbers::pi;
    out.push_back(w * w * ratio);
  }
  return out;
}

double weyl_exponent() { return std::log(3.0) / std::log(5.0); }

FitReport spectral_dim_fit(const Spectrum& spectrum, const WindowPolicy& window) {
  const auto& ev = spectrum.eigenvalues;
  if (!(window.high_fraction > 0.0 && window.high_fraction <= 1.0)) {
    throw InvalidParameter("window upper fraction must lie in (0, 1]");
  }
  const std::size_t lo = window.drop_low;
  const auto hi = static_cast<std::size_t>(std::floor(window.high_fraction * static_cast<double>(ev.size())));
  if (hi <= lo || hi - lo < window.min_points) {
    throw InvalidParameter("fit window holds " + std::to_string(hi > lo ? hi - lo : 0) +
                           " eigenvalues, at least " + std::to_string(window.min_points) + " are required");
  }
  if (!(ev[lo] > 0.0)) throw InvalidParameter("fit window must exclude the zero eigenvalue");

  // Points (kappa_i, i + 1): ties keep their sorted order.
  const std::size_t count = hi - lo;
  std::vector<double> lx(count), ly(count);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    lx[i] = std::log(ev[lo + i]);
    ly[i] = std::log(static_cast<double>(lo + i + 1));
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidParameter("fit window spans a single eigenvalue");

  FitReport report;
  report.x_lo = ev[lo];
  report.x_hi = ev[hi - 1];
  report.points = count;
  report.slope = sxy / sxx;
  report.intercept = my - report.slope * mx;
  report.d_s = 2.0 * report.slope;
  const double gamma = weyl_exponent();
  report.c1 = std::numeric_limits<double>::infinity();
  report.c2 = 0.0;
  report.residuals.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double ratio = std::exp(ly[i] - gamma * lx[i]);
    report.c1 = std::min(report.c1, ratio);
    report.c2 = std::max(report.c2, ratio);
    report.residuals[i] = ly[i] - (report.intercept + report.slope * lx[i]);
  }
  return report;
}

WeylBracketReport weyl_bracket_check(const Spectrum& neumann, const Spectrum& dirichlet, const WindowPolicy& window,
                                     double rel_tol) {
  if (neumann.bc != Boundary::Neumann || dirichlet.bc != Boundary::Dirichlet) {
    throw InvalidParameter("bracket check needs one Neumann and one Dirichlet spectrum");
  }
  if (!(neumann.provenance == dirichlet.provenance)) {
    throw InvalidParameter("Neumann and Dirichlet spectra come from different meshes");
  }
  WeylBracketReport report;
  if (neumann.eigenvalues.empty() || dirichlet.eigenvalues.empty()) return report;

  // Both counting functions are known exactly only below the largest computed eigenvalue of each.
  report.x_max = std::min(neumann.eigenvalues.back(), dirichlet.eigenvalues.back());
  std::vector<double> xs;
  for (const auto* s : {&neumann, &dirichlet}) {
    for (double x : s->eigenvalues) {
      if (x <= report.x_max) xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  report.max_gap = std::numeric_limits<long long>::min();
  report.min_gap = std::numeric_limits<long long>::max();
  for (double x : xs) {
    const double wide = x + rel_tol * std::abs(x);
    const auto nn = static_cast<long long>(counting_function(neumann, x));
    const auto nd = static_cast<long long>(counting_function(dirichlet, x));
    const auto nn_wide = static_cast<long long>(counting_function(neumann, wide));
    const auto nd_wide = static_cast<long long>(counting_function(dirichlet, wide));
    report.max_gap = std::max(report.max_gap, nn - nd_wide);
    report.min_gap = std::min(report.min_gap, nn_wide - nd);
  }
  report.dirichlet_below_neumann = report.min_gap >= 0;
  report.gap_within_boundary_rank = report.min_gap >= 0 && report.max_gap <= 3;

  auto try_fit = [&](const Spectrum& s) -> std::optional<FitReport> {
    try {
      return spectral_dim_fit(s, window);
    } catch (const InvalidParameter&) {
      return std::nullopt;
    }
  };
  report.neumann_fit = try_fit(neumann);
  report.dirichlet_fit = try_fit(dirichlet);
  return report;
}

}  // namespace hanoi
