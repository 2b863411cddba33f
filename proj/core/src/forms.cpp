#include "hanoi/forms.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "hanoi/errors.hpp"

namespace hanoi {

namespace {

using Triplet = Eigen::Triplet<double, int>;

SparseMatrix stiffness_from_edges(std::size_t n, const std::vector<Conductance>& edges) {
  std::vector<Triplet> t;
  t.reserve(4 * edges.size());
  for (const auto& e : edges) {
    const int a = static_cast<int>(e.a);
    const int b = static_cast<int>(e.b);
    t.emplace_back(a, a, e.c);
    t.emplace_back(b, b, e.c);
    t.emplace_back(a, b, -e.c);
    t.emplace_back(b, a, -e.c);
  }
  SparseMatrix k(static_cast<int>(n), static_cast<int>(n));
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

// Maps global node ids to positions in `subset`, or -1.
std::vector<int> local_index(std::size_t n, std::span<const std::size_t> subset) {
  std::vector<int> idx(n, -1);
  for (std::size_t i = 0; i < subset.size(); ++i) idx[subset[i]] = static_cast<int>(i);
  return idx;
}

SparseMatrix sub_block(const SparseMatrix& k, const std::vector<int>& rows, int nrows,
                       const std::vector<int>& cols, int ncols) {
  std::vector<Triplet> t;
  for (int j = 0; j < k.outerSize(); ++j) {
    if (cols[j] < 0) continue;
    for (SparseMatrix::InnerIterator it(k, j); it; ++it) {
      if (rows[it.row()] >= 0) t.emplace_back(rows[it.row()], cols[j], it.value());
    }
  }
  SparseMatrix out(nrows, ncols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

void check_node(const EnergyForm& form, std::size_t id) {
  if (id >= form.node_count()) {
    std::ostringstream msg;
    msg << "node id " << id << " out of range (form has " << form.node_count() << " nodes)";
    throw InvalidParameter(msg.str());
  }
}

}  // namespace

RenormFactors::RenormFactors(double alpha, int max_level) : alpha_(alpha), max_level_(max_level) {
  (void)Params{alpha};
  if (max_level < 0) throw InvalidParameter("max_level must be >= 0");
  const std::size_t n = static_cast<std::size_t>(max_level) + 1;
  d_.assign(n, 0.0);
  rd_.assign(n, 0.0);
  rc_.assign(n, 0.0);
  rho_d_.assign(n, 1.0);
  rho_c_.assign(n, 0.0);
  for (int k = 1; k <= max_level; ++k) {
    const double dk = segment_length(alpha, k);
    d_[k] = dk;
    rd_[k] = 3.0 / (5.0 + 3.0 * dk);
    rc_[k] = 3.0 * dk / (5.0 + 3.0 * dk);
    rho_d_[k] = rho_d_[k - 1] * rd_[k];
    rho_c_[k] = rho_d_[k - 1] * rc_[k];
  }
}

std::array<double, 3> RenormFactors::extension_weights(int m) const {
  // The step m -> m+1 inserts the segments of J_{m+1} \ J_m, whose length is d_{m+1}.
  const double d = segment_length(alpha_, m + 1);
  const double denom = 5.0 + 3.0 * d;
  return {(2.0 + 3.0 * d) / denom, 2.0 / denom, 1.0 / denom};
}

RenormFactors renorm_factors(const Params& params, int max_level) {
  return RenormFactors(params.alpha(), max_level);
}

EnergyForm::EnergyForm(std::size_t node_count, std::vector<Conductance> edges,
                       std::array<std::size_t, 3> boundary)
    : node_count_(node_count),
      edges_(std::move(edges)),
      stiffness_(stiffness_from_edges(node_count, edges_)),
      boundary_(boundary) {}

double EnergyForm::energy(std::span<const double> u) const {
  if (u.size() != node_count_) throw InvalidParameter("function size does not match node count");
  double e = 0.0;
  for (const auto& edge : edges_) {
    const double diff = u[edge.a] - u[edge.b];
    e += edge.c * diff * diff;
  }
  return e;
}

namespace {

EnergyForm assemble(const Mesh& mesh, double discrete_c, const std::vector<double>& piece_c) {
  std::vector<Conductance> edges;
  edges.reserve(mesh.discrete_edges().size() + mesh.segments().size() * mesh.subdiv());
  for (const auto& e : mesh.discrete_edges()) edges.push_back({e.a, e.b, discrete_c});
  for (const auto& s : mesh.segments()) {
    const double c = piece_c.at(s.level);
    std::size_t prev = s.a;
    for (auto id : s.interior) {
      edges.push_back({prev, id, c});
      prev = id;
    }
    edges.push_back({prev, s.b, c});
  }
  return EnergyForm(mesh.node_count(), std::move(edges), mesh.boundary());
}

}  // namespace

EnergyForm assemble_energy(const Mesh& mesh, const RenormFactors& factors) {
  if (factors.alpha() != mesh.params().alpha()) {
    throw InvalidParameter("renormalization factors were computed for a different alpha");
  }
  if (factors.max_level() < mesh.level()) {
    std::ostringstream msg;
    msg << "renormalization factors cover levels <= " << factors.max_level() << " but mesh has level "
        << mesh.level();
    throw InvalidParameter(msg.str());
  }
  const int n = mesh.level();
  const double m = mesh.subdiv();
  std::vector<double> piece(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) piece[k] = m / factors.rho_c(k);
  return assemble(mesh, 1.0 / factors.rho_d(n), piece);
}

EnergyForm assemble_raw_energy(const Mesh& mesh) {
  const int n = mesh.level();
  const double m = mesh.subdiv();
  std::vector<double> piece(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) piece[k] = m / segment_length(mesh.params().alpha(), k);
  return assemble(mesh, 1.0, piece);
}

std::vector<double> minimize_energy(const EnergyForm& form, std::span<const std::size_t> fixed,
                                    std::span<const double> fixed_values) {
  if (fixed.size() != fixed_values.size()) throw InvalidParameter("fixed ids and values differ in size");
  if (fixed.empty()) throw InvalidParameter("at least one node must be fixed");
  const std::size_t n = form.node_count();
  for (auto id : fixed) check_node(form, id);

  std::vector<double> u(n, 0.0);
  std::vector<bool> is_fixed(n, false);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    is_fixed[fixed[i]] = true;
    u[fixed[i]] = fixed_values[i];
  }
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_fixed[i]) free.push_back(i);
  }
  if (free.empty()) return u;

  const auto free_idx = local_index(n, free);
  const auto fixed_idx = local_index(n, fixed);
  const int nf = static_cast<int>(free.size());
  const SparseMatrix kff = sub_block(form.stiffness(), free_idx, nf, free_idx, nf);
  const SparseMatrix kfb = sub_block(form.stiffness(), free_idx, nf, fixed_idx, static_cast<int>(fixed.size()));

  Eigen::VectorXd ub(static_cast<Eigen::Index>(fixed.size()));
  for (std::size_t i = 0; i < fixed.size(); ++i) ub[static_cast<Eigen::Index>(i)] = fixed_values[i];
  const Eigen::VectorXd rhs = -(kfb * ub);

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(kff);
  if (ldlt.info() != Eigen::Success) throw SolverError("interior stiffness block is singular");
  const Eigen::VectorXd uf = ldlt.solve(rhs);
  for (int i = 0; i < nf; ++i) u[free[i]] = uf[i];

  // Refinement with the residual -(K u) on free rows, summed edge by edge as
  // c (u(a) - u(b)) in extended precision so constants stay exactly in the kernel.
  std::vector<long double> ku(n);
  for (int step = 0; step < 3; ++step) {
    std::fill(ku.begin(), ku.end(), 0.0L);
    for (const Conductance& e : form.edges()) {
      const long double flux = static_cast<long double>(e.c) * (static_cast<long double>(u[e.a]) - u[e.b]);
      ku[e.a] += flux;
      ku[e.b] -= flux;
    }
    Eigen::VectorXd r(nf);
    for (int i = 0; i < nf; ++i) r[i] = static_cast<double>(-ku[free[i]]);
    if (r.cwiseAbs().maxCoeff() == 0.0) break;
    const Eigen::VectorXd du = ldlt.solve(r);
    for (int i = 0; i < nf; ++i) u[free[i]] += du[i];
  }
  return u;
}

std::vector<double> harmonic_extension(const std::array<double, 3>& boundary_values, const Mesh& mesh,
                                       const RenormFactors& factors, ExtensionMethod method) {
  if (factors.alpha() != mesh.params().alpha() || factors.max_level() < mesh.level()) {
    throw InvalidParameter("renormalization factors do not match the mesh");
  }
  if (mesh.level() < 1) throw InvalidParameter("harmonic extension needs a mesh of level at least 1");
  if (method == ExtensionMethod::Solve) {
    const EnergyForm form = assemble_energy(mesh, factors);
    const auto b = mesh.boundary();
    return minimize_energy(form, b, boundary_values);
  }

  // Corner values per cell, refined one level at a time.
  std::vector<double> cells(boundary_values.begin(), boundary_values.end());
  for (int m = 0; m < mesh.level(); ++m) {
    const auto [own, adjacent, opposite] = factors.extension_weights(m);
    std::vector<double> next(3 * cells.size());
    const std::size_t count = cells.size() / 3;
    for (std::size_t c = 0; c < count; ++c) {
      const double* u = &cells[3 * c];
      for (int i = 0; i < 3; ++i) {
        double* child = &next[3 * (3 * c + i)];
        for (int j = 0; j < 3; ++j) {
          const int k = 3 - i - j;
          child[j] = (i == j) ? u[i] : own * u[i] + adjacent * u[j] + opposite * u[k];
        }
      }
    }
    cells = std::move(next);
  }

  std::vector<double> u(mesh.node_count(), 0.0);
  std::copy(cells.begin(), cells.end(), u.begin());
  const double pieces = mesh.subdiv();
  for (const auto& s : mesh.segments()) {
    const double ua = u[s.a];
    const double ub = u[s.b];
    for (std::size_t i = 0; i < s.interior.size(); ++i) {
      const double t = static_cast<double>(i + 1) / pieces;
      u[s.interior[i]] = ua + t * (ub - ua);
    }
  }
  return u;
}

double TracedForm::energy(std::span<const double> v) const {
  if (v.size() != nodes.size()) throw InvalidParameter("function size does not match traced node count");
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  return x.dot(matrix * x);
}

TracedForm trace_to_boundary(const EnergyForm& form, std::span<const std::size_t> keep) {
  if (keep.empty()) throw InvalidParameter("trace requires a nonempty node set");
  const std::size_t n = form.node_count();
  for (auto id : keep) check_node(form, id);
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  {
    auto sorted = kept;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InvalidParameter("trace node set contains duplicates");
    }
  }

  const auto keep_idx = local_index(n, kept);
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep_idx[i] < 0) interior.push_back(i);
  }
  const int nk = static_cast<int>(kept.size());
  TracedForm out{kept, Eigen::MatrixXd(sub_block(form.stiffness(), keep_idx, nk, keep_idx, nk))};
  if (interior.empty()) return out;

  const auto int_idx = local_index(n, interior);
  const int ni = static_cast<int>(interior.size());
  const SparseMatrix kii = sub_block(form.stiffness(), int_idx, ni, int_idx, ni);
  const Eigen::MatrixXd kik = Eigen::MatrixXd(sub_block(form.stiffness(), int_idx, ni, keep_idx, nk));

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(kii);
  if (ldlt.info() != Eigen::Success) throw SolverError("interior block of the trace is singular");
  const Eigen::MatrixXd x = ldlt.solve(kik);
  out.matrix -= kik.transpose() * x;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

double effective_resistance(const EnergyForm& form, std::size_t a, std::size_t b) {
  check_node(form, a);
  check_node(form, b);
  if (a == b) return 0.0;
  const std::array<std::size_t, 2> pair{a, b};
  const TracedForm t = trace_to_boundary(form, pair);
  return 1.0 / t.conductance(0, 1);
}

double holder_constant(const Mesh& mesh, std::span<const double> u, double energy, double exponent) {
  if (u.size() != mesh.node_count()) throw InvalidParameter("function size does not match node count");
  if (!(energy > 0.0)) throw InvalidParameter("Hölder constant needs a function with positive energy");
  const auto& v = mesh.vertices();
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      const double dist = std::hypot(v[i].pos.x - v[j].pos.x, v[i].pos.y - v[j].pos.y);
      const double ratio = std::abs(u[i] - u[j]) / std::pow(dist, exponent);
      worst = std::max(worst, ratio);
    }
  }
  return worst / std::sqrt(energy);
}

}  // namespace hanoi
