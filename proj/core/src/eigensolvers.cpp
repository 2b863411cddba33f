#include "eigensolvers.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "hanoi/errors.hpp"

namespace hanoi::detail {
namespace {

// Stiffness with row/column 0 removed when the constants are to be grounded out.
SparseMatrix grounded(const Pencil& p) {
  if (!p.constant_kernel) return p.stiffness;
  const Eigen::Index n = p.stiffness.rows();
  return p.stiffness.bottomRightCorner(n - 1, n - 1);
}

std::vector<double> reciprocals_ascending(std::vector<double> theta) {
  std::vector<double> kappa;
  kappa.reserve(theta.size());
  for (double t : theta) {
    if (!(t > 0.0)) throw SolverError("inverse operator returned a nonpositive eigenvalue");
    kappa.push_back(1.0 / t);
  }
  std::sort(kappa.begin(), kappa.end());
  return kappa;
}

}  // namespace

std::vector<double> dense_smallest(const Pencil& p, std::size_t count) {
  const Eigen::Index n = p.stiffness.rows();
  const Eigen::Index ng = p.constant_kernel ? n - 1 : n;
  if (count == 0) return {};

  Eigen::MatrixXd g;
  {
    Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(grounded(p))};
    if (llt.info() != Eigen::Success) throw SolverError("dense Cholesky of the stiffness failed");
    g = llt.solve(Eigen::MatrixXd::Identity(ng, ng));
  }
  g = 0.5 * (g + g.transpose()).eval();

  const Eigen::VectorXd sqrt_m = p.mass.cwiseSqrt();
  Eigen::MatrixXd c(n, n);
  if (p.constant_kernel) {
    // C = M^{1/2} P G P^T M^{1/2}, P = I - 1 w^T, w = m / sum(m), G padded with a zero row/column.
    const Eigen::VectorXd w = p.mass / p.mass.sum();
    Eigen::VectorXd gw = Eigen::VectorXd::Zero(n);
    gw.tail(ng) = g * w.tail(ng);
    const double s = w.dot(gw);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double gij = (i > 0 && j > 0) ? g(i - 1, j - 1) : 0.0;
        c(i, j) = sqrt_m(i) * (gij - gw(i) - gw(j) + s) * sqrt_m(j);
      }
    }
  } else {
    c = sqrt_m.asDiagonal() * g * sqrt_m.asDiagonal();
  }
  g.resize(0, 0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SolverError("dense symmetric eigensolver did not converge");
  const Eigen::VectorXd& theta = eig.eigenvalues();
  std::vector<double> top(theta.data() + (n - static_cast<Eigen::Index>(count)), theta.data() + n);
  return reciprocals_ascending(std::move(top));
}

namespace {

class InverseOperator {
 public:
  explicit InverseOperator(const Pencil& p)
      : kernel_(p.constant_kernel), sqrt_m_(p.mass.cwiseSqrt()), weights_(p.mass / p.mass.sum()) {
    ldlt_.compute(grounded(p));
    if (ldlt_.info() != Eigen::Success) {
      throw SolverError("sparse factorization of the stiffness failed");
    }
  }

  Eigen::Index size() const { return sqrt_m_.size(); }

  // Y -> M^{1/2} K^+ M^{1/2} Y on the M^{1/2}-orthogonal complement of the kernel.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& y) const {
    const Eigen::MatrixXd b = sqrt_m_.asDiagonal() * y;
    Eigen::MatrixXd x;
    if (kernel_) {
      const Eigen::Index n = size();
      x = Eigen::MatrixXd::Zero(n, y.cols());
      x.bottomRows(n - 1) = ldlt_.solve(b.bottomRows(n - 1));
      const Eigen::RowVectorXd mean = weights_.transpose() * x;
      x.rowwise() -= mean;
    } else {
      x = ldlt_.solve(b);
    }
    return sqrt_m_.asDiagonal() * x;
  }

  // Unit vector spanning the kernel of the symmetric operator, if any.
  std::optional<Eigen::VectorXd> kernel_vector() const {
    if (!kernel_) return std::nullopt;
    return Eigen::VectorXd(sqrt_m_.normalized());
  }

 private:
  bool kernel_;
  Eigen::VectorXd sqrt_m_;
  Eigen::VectorXd weights_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

class Basis {
 public:
  Basis(Eigen::Index n, Eigen::Index capacity) : data_(n, capacity) {}

  Eigen::Index cols() const { return used_; }
  Eigen::Index capacity() const { return data_.cols(); }
  auto active() const { return data_.leftCols(used_); }
  auto block(Eigen::Index offset, Eigen::Index width) const { return data_.middleCols(offset, width); }

  void append(const Eigen::MatrixXd& block) {
    data_.middleCols(used_, block.cols()) = block;
    used_ += block.cols();
  }

 private:
  Eigen::MatrixXd data_;
  Eigen::Index used_ = 0;
};

// Removes the components along `basis` twice (classical Gram-Schmidt with reorthogonalization).
void project_out(Eigen::MatrixXd& w, const Eigen::Ref<const Eigen::MatrixXd>& basis) {
  if (basis.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= basis * (basis.transpose() * w);
}

struct LanczosContext {
  const InverseOperator& op;
  const SolverOptions& options;
  std::mt19937_64& rng;
};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

// Removes from x its components along every matrix in `fixed` and the first `prev` columns
// of `q`, repeating while a pass still cancels a large part of the norm. Returns the final norm.
double orthogonalize(Eigen::VectorXd& x, const std::vector<Eigen::Ref<const Eigen::MatrixXd>>& fixed,
                     const Eigen::MatrixXd& q, Eigen::Index prev) {
  double before = x.norm();
  double after = before;
  for (int pass = 0; pass < 5; ++pass) {
    for (const auto& f : fixed) {
      if (f.cols() > 0) x.noalias() -= f * (f.transpose() * x);
    }
    if (prev > 0) x.noalias() -= q.leftCols(prev) * (q.leftCols(prev).transpose() * x);
    after = x.norm();
    if (after > 0.7 * before) break;
    before = after;
  }
  return after;
}

// Orthonormal basis for the columns of w, orthogonal to `fixed`. Columns that are numerically
// dependent (norm below `drop`) are replaced by fresh random directions.
Eigen::MatrixXd orthonormalize_block(const Eigen::MatrixXd& w,
                                     const std::vector<Eigen::Ref<const Eigen::MatrixXd>>& fixed, double drop,
                                     std::mt19937_64& rng) {
  const Eigen::Index n = w.rows();
  const Eigen::Index b = w.cols();
  Eigen::MatrixXd q(n, b);
  for (Eigen::Index c = 0; c < b; ++c) {
    Eigen::VectorXd x = w.col(c);
    double norm = orthogonalize(x, fixed, q, c);
    for (int attempt = 0; !(norm > drop) && attempt < 8; ++attempt) {
      x = random_vector(n, rng);
      norm = orthogonalize(x, fixed, q, c);
      if (norm < 1e-8 * std::sqrt(static_cast<double>(n))) norm = 0.0;
      drop = 0.0;
    }
    if (!(norm > 0.0)) throw SolverError("Lanczos could not extend the Krylov basis");
    q.col(c) = x / norm;
  }
  return q;
}

struct RunResult {
  std::vector<double> values;
  Eigen::MatrixXd vectors;
};

std::string residual_summary(const Eigen::VectorXd& theta, const Eigen::VectorXd& res, Eigen::Index top) {
  std::ostringstream os;
  os.precision(3);
  os << "Lanczos did not converge; relative residuals of the leading Ritz values:";
  for (Eigen::Index i = 0; i < top && i < theta.size(); ++i) {
    os << ' ' << std::scientific << res(i) / std::abs(theta(i));
  }
  return os.str();
}

// One block Lanczos run on the operator deflated by `locked`. Without a threshold it converges
// the `need` largest Ritz values; with one it returns every converged Ritz value above it.
RunResult lanczos_run(const LanczosContext& ctx, const Eigen::MatrixXd& locked, Eigen::Index need,
                      std::optional<double> threshold) {
  const Eigen::Index n = ctx.op.size();
  const Eigen::Index free_dim = n - locked.cols();
  const auto b = std::min<Eigen::Index>(static_cast<Eigen::Index>(ctx.options.block_size), free_dim);
  const double tol = ctx.options.tolerance;
  const double sep = 1.0 + 1e-9;

  Basis q(n, free_dim);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(free_dim, free_dim);

  Eigen::MatrixXd start(n, b);
  for (Eigen::Index c = 0; c < b; ++c) start.col(c) = random_vector(n, ctx.rng);
  q.append(orthonormalize_block(start, {locked}, 0.0, ctx.rng));

  std::vector<Eigen::Index> offsets{0};
  double scale = 0.0;
  Eigen::Index next_check = std::min(free_dim, need + b);

  for (std::size_t j = 0;; ++j) {
    const Eigen::Index off = offsets[j];
    const Eigen::Index width = q.cols() - off;
    Eigen::MatrixXd w = ctx.op.apply(q.block(off, width));
    // Full projection coefficients: T stays exactly Q^T Op Q even after basis repairs.
    Eigen::MatrixXd h = q.active().transpose() * w;
    w.noalias() -= q.active() * h;
    const Eigen::MatrixXd h2 = q.active().transpose() * w;
    w.noalias() -= q.active() * h2;
    h += h2;
    project_out(w, locked);
    const Eigen::Index used = q.cols();
    t.block(0, off, used, width) = h;
    t.block(off, 0, width, used) = h.transpose();
    const Eigen::MatrixXd a = 0.5 * (h.bottomRows(width) + h.bottomRows(width).transpose());
    t.block(off, off, width, width) = a;
    scale = std::max(scale, a.cwiseAbs().maxCoeff());

    const Eigen::Index m = q.cols();
    const bool exhausted = m >= free_dim;
    if (m >= next_check || exhausted) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(t.topLeftCorner(m, m));
      if (ritz.info() != Eigen::Success) throw SolverError("Ritz eigendecomposition failed");
      // Descending order.
      const Eigen::VectorXd theta = ritz.eigenvalues().reverse();
      const Eigen::MatrixXd s = ritz.eigenvectors().rowwise().reverse();
      Eigen::VectorXd res(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        res(i) = exhausted ? 0.0 : (w * s.col(i).tail(width)).norm();
      }
      auto converged = [&](Eigen::Index i) { return theta(i) > 0.0 && res(i) <= tol * theta(i); };

      Eigen::Index take = 0;
      bool done = false;
      if (!threshold) {
        take = std::min(need, m);
        done = true;
        for (Eigen::Index i = 0; i < take; ++i) done = done && converged(i);
      } else {
        while (take < m && theta(take) > *threshold * sep) ++take;
        done = true;
        for (Eigen::Index i = 0; i < std::min(take + 1, m); ++i) done = done && converged(i);
      }
      if (done || exhausted) {
        if (!done) throw SolverError(residual_summary(theta, res, std::max<Eigen::Index>(take, 1)));
        RunResult out;
        out.values.assign(theta.data(), theta.data() + take);
        out.vectors = q.active() * s.leftCols(take);
        return out;
      }
      next_check = std::min(free_dim, m + std::max<Eigen::Index>(b, m / 8));
    }

    // Near the end of the space the next block is narrower than the residual block.
    const Eigen::Index width_next = std::min(b, free_dim - m);
    const Eigen::MatrixXd head = w.leftCols(width_next);
    const double drop = 4.0 * std::numeric_limits<double>::epsilon() * scale;
    const Eigen::MatrixXd q_next = orthonormalize_block(head, {q.active(), locked}, drop, ctx.rng);
    offsets.push_back(m);
    t.block(m, off, width_next, width) = q_next.transpose() * w;
    t.block(off, m, width, width_next) = t.block(m, off, width_next, width).transpose();
    q.append(q_next);
  }
}

void lock(Eigen::MatrixXd& locked, const Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd v = vectors;
  project_out(v, locked);
  const Eigen::Index old = locked.cols();
  locked.conservativeResize(Eigen::NoChange, old + v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::VectorXd x = v.col(c);
    for (int pass = 0; pass < 2; ++pass) x -= locked.leftCols(old + c) * (locked.leftCols(old + c).transpose() * x);
    locked.col(old + c) = x.normalized();
  }
}

}  // namespace

std::vector<double> lanczos_smallest(const Pencil& p, std::size_t count, const SolverOptions& options) {
  if (count == 0) return {};
  if (options.block_size == 0) throw InvalidParameter("Lanczos block size must be positive");
  const InverseOperator op(p);
  std::mt19937_64 rng(options.seed);
  const LanczosContext ctx{op, options, rng};

  Eigen::MatrixXd locked(op.size(), 0);
  if (auto v = op.kernel_vector()) lock(locked, *v);

  const auto need = static_cast<Eigen::Index>(count);
  std::vector<double> found;
  auto threshold = [&]() {
    std::vector<double> sorted = found;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted.at(static_cast<std::size_t>(need) - 1);
  };

  RunResult first = lanczos_run(ctx, locked, need, std::nullopt);
  found = first.values;
  lock(locked, first.vectors);

  // Later runs recover further copies of multiple eigenvalues that a block of this width
  // cannot resolve in one pass.
  const std::size_t max_runs = 16 + 4 * count / std::max<std::size_t>(options.block_size, 1);
  for (std::size_t run = 0; run < max_runs; ++run) {
    if (locked.cols() >= op.size()) break;
    RunResult next = lanczos_run(ctx, locked, need, threshold());
    if (next.values.empty()) {
      std::sort(found.begin(), found.end(), std::greater<>());
      found.resize(static_cast<std::size_t>(need));
      return reciprocals_ascending(std::move(found));
    }
    found.insert(found.end(), next.values.begin(), next.values.end());
    lock(locked, next.vectors);
  }
  if (locked.cols() < op.size()) throw SolverError("Lanczos locking did not terminate");
  std::sort(found.begin(), found.end(), std::greater<>());
  found.resize(static_cast<std::size_t>(need));
  return reciprocals_ascending(std::move(found));
}

}  // namespace hanoi::detail
