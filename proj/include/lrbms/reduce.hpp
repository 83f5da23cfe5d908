#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lrbms/data.hpp"
#include "lrbms/dg_space.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/parallel.hpp"
#include "lrbms/quadrature.hpp"
#include "lrbms/swipdg.hpp"

namespace lrbms {

/// Orthonormal (w.r.t. a local product) basis of fine dof vectors supported on one coarse element.
struct LocalReducedBasis {
  int T = kNone;
  Eigen::MatrixXd vectors;  // coarse_size x N^T, local dof numbering
  int size() const { return static_cast<int>(vectors.cols()); }
};

/// Local products b^T(.,.;mu_bar) + penalty terms on the faces of T, and the
/// Gram-Schmidt extension built on top of them.
class BasisProducts {
public:
  BasisProducts() = default;
  BasisProducts(const AssembledSystem& sys, const Parameter& mu_bar) : sys_(&sys), mu_bar_(mu_bar) {
    const DGSpace& space = *sys.space;
    const SparseMatrix P = sys.product_matrix(mu_bar);
    blocks_.resize(static_cast<std::size_t>(space.grid().num_coarse()));
    for (int T = 0; T < space.grid().num_coarse(); ++T) {
      const int o = space.coarse_first_dof(T), m = space.coarse_size();
      blocks_[static_cast<std::size_t>(T)] = P.block(o, o, m, m);
    }
  }

  const Parameter& mu_bar() const { return mu_bar_; }
  const SparseMatrix& block(int T) const { return blocks_[static_cast<std::size_t>(T)]; }
  double inner(int T, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return u.dot(block(T) * v); }
  double norm(int T, const Eigen::VectorXd& v) const { return std::sqrt(std::max(0.0, inner(T, v, v))); }

  Eigen::MatrixXd gram(const LocalReducedBasis& b) const {
    return b.vectors.transpose() * (block(b.T) * b.vectors);
  }

  /// Two-pass Gram-Schmidt; appends v if enough of it survives orthogonalization.
  bool extend(LocalReducedBasis& b, Eigen::VectorXd v, double tol_rel = 1e-10) const {
    const double before = norm(b.T, v);
    if (!(before > 0.0) || !std::isfinite(before)) return false;
    for (int pass = 0; pass < 2; ++pass)
      if (b.size() > 0) v -= b.vectors * (b.vectors.transpose() * (block(b.T) * v));
    const double after = norm(b.T, v);
    if (!(after > tol_rel * before)) return false;
    b.vectors.conservativeResize(v.size(), b.size() + 1);
    b.vectors.col(b.size() - 1) = v / after;
    return true;
  }

private:
  const AssembledSystem* sys_ = nullptr;
  Parameter mu_bar_;
  std::vector<SparseMatrix> blocks_;
};

/// Coarse polynomial shape functions on each T, L2-projected into the fine
/// space and orthonormalized. k_H = 1 gives {1, x, y, xy} (tensor) or {1, x, y}.
inline std::vector<LocalReducedBasis> initialize_bases(const BasisProducts& products, const DGSpace& space, int k_H,
                                                       bool tensor = true, double tol_rel = 1e-10) {
  if (k_H < 0) throw InvalidArgument("initialize_bases: k_H must be >= 0");
  const auto& grid = space.grid();
  const int nloc = space.local_size();
  const auto rule = triangle_rule(2 * k_H + 2 * space.order());
  // reference mass matrix times 2|t| gives the physical one
  Eigen::MatrixXd Mref = Eigen::MatrixXd::Zero(nloc, nloc);
  for (const auto& q : rule) {
    const Eigen::VectorXd phi = space.basis_values(q.position);
    Mref += q.weight * phi * phi.transpose();
  }
  const Eigen::LDLT<Eigen::MatrixXd> Minv(Mref);

  std::vector<std::pair<int, int>> exps;
  for (int a = 0; a <= k_H; ++a)
    for (int b = 0; b <= k_H; ++b)
      if (tensor || a + b <= k_H) exps.emplace_back(a, b);
  std::sort(exps.begin(), exps.end(), [](auto l, auto r) {
    return l.first + l.second != r.first + r.second ? l.first + l.second < r.first + r.second : l.second < r.second;
  });

  std::vector<LocalReducedBasis> bases(static_cast<std::size_t>(grid.num_coarse()));
  parallel_for(bases.size(), [&](std::size_t Ti) {
    const int T = static_cast<int>(Ti);
    const Rectangle R = grid.coarse_rectangle(T);
    const double cx = 0.5 * (R.x0 + R.x1), cy = 0.5 * (R.y0 + R.y1);
    const double sx = 0.5 * R.width(), sy = 0.5 * R.height();
    auto& b = bases[Ti];
    b.T = T;
    b.vectors.resize(space.coarse_size(), 0);
    for (auto [ea, eb] : exps) {
      Eigen::VectorXd v(space.coarse_size());
      for (int i = 0; i < grid.triangles_per_coarse(); ++i) {
        const int t = grid.first_triangle(T) + i;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nloc);
        for (const auto& q : rule) {
          const Point x = space.to_physical(t, q.position);
          const double g = std::pow((x.x() - cx) / sx, ea) * std::pow((x.y() - cy) / sy, eb);
          rhs += q.weight * g * space.basis_values(q.position);
        }
        v.segment(i * nloc, nloc) = Minv.solve(rhs);
      }
      products.extend(b, v, tol_rel);
    }
  });
  return bases;
}

struct ReducedSolveOptions {
  int dense_limit = 2000;
  double tol = 1e-12;
  bool force_sparse = false;
};

/// Block-sparse reduced operator: per component, Phi_T^t B_xi[T,S] Phi_S for S in {T} u N(T).
class ReducedSystem {
public:
  ReducedSystem(const AssembledSystem& sys, const std::vector<LocalReducedBasis>& bases)
      : sys_(&sys), bases_(&bases) {
    const DGSpace& space = *sys.space;
    const auto& grid = space.grid();
    const int nT = grid.num_coarse(), m = space.coarse_size();
    if (static_cast<int>(bases.size()) != nT) throw InvalidArgument("ReducedSystem: need one basis per coarse element");
    for (int T = 0; T < nT; ++T)
      if (bases[static_cast<std::size_t>(T)].vectors.rows() != m || bases[static_cast<std::size_t>(T)].T != T)
        throw InvalidArgument("ReducedSystem: basis of coarse element " + std::to_string(T) + " has the wrong layout");
    const std::size_t nxi = sys.components();
    pairs_.resize(static_cast<std::size_t>(nT));
    for (int T = 0; T < nT; ++T) {
      auto& p = pairs_[static_cast<std::size_t>(T)];
      p = grid.coarse_neighbors(T);
      p.push_back(T);
      std::sort(p.begin(), p.end());
    }
    fine_.assign(nxi, std::vector<std::vector<SparseMatrix>>(static_cast<std::size_t>(nT)));
    reduced_.assign(nxi, std::vector<std::vector<Eigen::MatrixXd>>(static_cast<std::size_t>(nT)));
    fine_load_.resize(static_cast<std::size_t>(nT));
    parallel_for(static_cast<std::size_t>(nT), [&](std::size_t Ti) {
      const int T = static_cast<int>(Ti);
      const int oT = space.coarse_first_dof(T);
      for (std::size_t xi = 0; xi < nxi; ++xi) {
        for (int S : pairs_[Ti]) {
          fine_[xi][Ti].push_back(sys.full[xi].block(oT, space.coarse_first_dof(S), m, m));
          reduced_[xi][Ti].emplace_back();
        }
      }
      fine_load_[Ti] = sys.load_f.segment(oT, m);
    });
    dirichlet_.assign(nxi, {});
    for (std::size_t xi = 0; xi < nxi; ++xi)
      if (sys.load_dirichlet[xi].size()) dirichlet_[xi] = sys.load_dirichlet[xi];
    refresh_all();
  }

  int num_coarse() const { return static_cast<int>(pairs_.size()); }
  const std::vector<int>& pairs(int T) const { return pairs_[static_cast<std::size_t>(T)]; }
  const std::vector<LocalReducedBasis>& bases() const { return *bases_; }

  int offset(int T) const { return offsets_[static_cast<std::size_t>(T)]; }
  int size() const { return offsets_.back(); }

  /// Recompute every reduced block.
  void refresh_all() {
    parallel_for(pairs_.size(), [&](std::size_t T) {
      for (std::size_t idx = 0; idx < pairs_[T].size(); ++idx) compute_block(static_cast<int>(T), idx);
    });
    update_offsets();
    ++revision_;
  }

  /// Recompute the blocks touched by a change of the basis on T: row T and column T.
  void refresh(int T) {
    const auto& pT = pairs(T);
    for (std::size_t idx = 0; idx < pT.size(); ++idx) {
      compute_block(T, idx);
      const int S = pT[idx];
      if (S == T) continue;
      const auto& pS = pairs(S);
      compute_block(S, static_cast<std::size_t>(std::find(pS.begin(), pS.end(), T) - pS.begin()));
    }
    update_offsets();
    ++revision_;
  }

  const Eigen::MatrixXd& block(std::size_t xi, int T, int S) const {
    const auto& p = pairs(T);
    const auto it = std::find(p.begin(), p.end(), S);
    if (it == p.end()) throw InvalidArgument("ReducedSystem: elements are not neighbors");
    return reduced_[xi][static_cast<std::size_t>(T)][static_cast<std::size_t>(it - p.begin())];
  }

  /// FNV-1a hash over the values of the (T, S) block of all components.
  std::uint64_t block_hash(int T, int S) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t xi = 0; xi < reduced_.size(); ++xi) {
      const auto& B = block(xi, T, S);
      const Eigen::Index dims[2] = {B.rows(), B.cols()};
      const auto* bytes = reinterpret_cast<const unsigned char*>(dims);
      for (std::size_t i = 0; i < sizeof(dims); ++i) h = (h ^ bytes[i]) * 1099511628211ULL;
      bytes = reinterpret_cast<const unsigned char*>(B.data());
      for (std::size_t i = 0; i < static_cast<std::size_t>(B.size()) * sizeof(double); ++i)
        h = (h ^ bytes[i]) * 1099511628211ULL;
    }
    return h;
  }

  Eigen::MatrixXd dense_matrix(const Parameter& mu) const {
    const auto th = sys_->lambda.thetas(mu);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size(), size());
    for (int T = 0; T < num_coarse(); ++T)
      for (std::size_t idx = 0; idx < pairs(T).size(); ++idx) {
        const int S = pairs(T)[idx];
        auto dst = A.block(offset(T), offset(S), bases()[static_cast<std::size_t>(T)].size(),
                           bases()[static_cast<std::size_t>(S)].size());
        for (std::size_t xi = 0; xi < th.size(); ++xi) dst += th[xi] * reduced_[xi][static_cast<std::size_t>(T)][idx];
      }
    return A;
  }

  SparseMatrix sparse_matrix(const Parameter& mu) const {
    const auto th = sys_->lambda.thetas(mu);
    std::vector<Triplet> trip;
    for (int T = 0; T < num_coarse(); ++T)
      for (std::size_t idx = 0; idx < pairs(T).size(); ++idx) {
        const int S = pairs(T)[idx];
        Eigen::MatrixXd B = th[0] * reduced_[0][static_cast<std::size_t>(T)][idx];
        for (std::size_t xi = 1; xi < th.size(); ++xi) B += th[xi] * reduced_[xi][static_cast<std::size_t>(T)][idx];
        for (Eigen::Index j = 0; j < B.cols(); ++j)
          for (Eigen::Index i = 0; i < B.rows(); ++i)
            trip.emplace_back(offset(T) + static_cast<int>(i), offset(S) + static_cast<int>(j), B(i, j));
      }
    SparseMatrix A(size(), size());
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
  }

  Eigen::VectorXd load(const Parameter& mu) const {
    const DGSpace& space = *sys_->space;
    const auto th = sys_->lambda.thetas(mu);
    Eigen::VectorXd l(size());
    for (int T = 0; T < num_coarse(); ++T) {
      Eigen::VectorXd fT = fine_load_[static_cast<std::size_t>(T)];
      for (std::size_t xi = 0; xi < dirichlet_.size(); ++xi)
        if (dirichlet_[xi].size()) fT += th[xi] * dirichlet_[xi].segment(space.coarse_first_dof(T), space.coarse_size());
      const auto& Phi = bases()[static_cast<std::size_t>(T)].vectors;
      l.segment(offset(T), Phi.cols()) = Phi.transpose() * fT;
    }
    return l;
  }

  Eigen::VectorXd solve(const Parameter& mu, const ReducedSolveOptions& opts = {}) const {
    const Eigen::VectorXd b = load(mu);
    if (b.norm() == 0.0) return Eigen::VectorXd::Zero(size());
    const bool symmetric = is_symmetric_form(*sys_);
    Eigen::VectorXd x;
    if (!opts.force_sparse && size() <= opts.dense_limit) {
      const Eigen::MatrixXd A = dense_matrix(mu);
      if (symmetric) {
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) throw singular(mu);
        x = llt.solve(b);
        for (int s = 0; s < 3 && (A * x - b).norm() > opts.tol * b.norm(); ++s) x += llt.solve(b - A * x);
      } else {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) throw singular(mu);
        x = lu.solve(b);
        for (int s = 0; s < 3 && (A * x - b).norm() > opts.tol * b.norm(); ++s) x += lu.solve(b - A * x);
      }
      if (!x.allFinite() || (A * x - b).norm() > opts.tol * b.norm()) throw singular(mu);
      return x;
    }
    const SparseMatrix A = sparse_matrix(mu);
    if (symmetric) {
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
      cg.setTolerance(0.1 * opts.tol);
      cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * A.rows()));
      cg.compute(A);
      x = cg.solve(b);
      if (cg.info() == Eigen::Success && relative_residual(A, x, b) <= opts.tol) return x;
    }
    try {
      return solve_sparse(A, b, symmetric, SolverKind::direct, opts.tol);
    } catch (const std::runtime_error&) {
      throw singular(mu);
    }
  }

  /// Global fine dof vector sum_T sum_i c_i^T phi_i^T.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& coefficients) const {
    if (coefficients.size() != size()) throw InvalidArgument("reconstruct: coefficient vector has the wrong size");
    const DGSpace& space = *sys_->space;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(space.size());
    for (int T = 0; T < num_coarse(); ++T) {
      const auto& Phi = bases()[static_cast<std::size_t>(T)].vectors;
      out.segment(space.coarse_first_dof(T), space.coarse_size()) = Phi * coefficients.segment(offset(T), Phi.cols());
    }
    return out;
  }

  /// Stacked bases as one sparse prolongation (fine x reduced).
  SparseMatrix prolongation() const {
    const DGSpace& space = *sys_->space;
    std::vector<Triplet> trip;
    for (int T = 0; T < num_coarse(); ++T) {
      const auto& Phi = bases()[static_cast<std::size_t>(T)].vectors;
      for (Eigen::Index j = 0; j < Phi.cols(); ++j)
        for (Eigen::Index i = 0; i < Phi.rows(); ++i)
          trip.emplace_back(space.coarse_first_dof(T) + static_cast<int>(i), offset(T) + static_cast<int>(j), Phi(i, j));
    }
    SparseMatrix V(space.size(), size());
    V.setFromTriplets(trip.begin(), trip.end());
    return V;
  }

  std::uint64_t revision() const { return revision_; }

private:
  void compute_block(int T, std::size_t idx) {
    const int S = pairs(T)[idx];
    const auto& PhiT = bases()[static_cast<std::size_t>(T)].vectors;
    const auto& PhiS = bases()[static_cast<std::size_t>(S)].vectors;
    for (std::size_t xi = 0; xi < fine_.size(); ++xi)
      reduced_[xi][static_cast<std::size_t>(T)][idx] =
          PhiT.transpose() * (fine_[xi][static_cast<std::size_t>(T)][idx] * PhiS);
  }

  void update_offsets() {
    offsets_.assign(pairs_.size() + 1, 0);
    for (std::size_t T = 0; T < pairs_.size(); ++T) offsets_[T + 1] = offsets_[T] + (*bases_)[T].size();
  }

  SingularSystemError singular(const Parameter& mu) const {
    const auto th = sys_->lambda.thetas(mu);
    for (int T = 0; T < num_coarse(); ++T) {
      const auto& p = pairs(T);
      const std::size_t idx = static_cast<std::size_t>(std::find(p.begin(), p.end(), T) - p.begin());
      Eigen::MatrixXd A = th[0] * reduced_[0][static_cast<std::size_t>(T)][idx];
      for (std::size_t xi = 1; xi < th.size(); ++xi) A += th[xi] * reduced_[xi][static_cast<std::size_t>(T)][idx];
      if (A.size() == 0) return SingularSystemError("reduced system: empty basis on coarse element " + std::to_string(T), T);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      lu.setThreshold(1e-13);
      if (!lu.isInvertible())
        return SingularSystemError("reduced system: singular diagonal block on coarse element " + std::to_string(T), T);
    }
    return SingularSystemError("reduced system is singular (no single subdomain block is to blame)", kNone);
  }

  const AssembledSystem* sys_;
  const std::vector<LocalReducedBasis>* bases_;
  std::vector<std::vector<int>> pairs_;
  std::vector<std::vector<std::vector<SparseMatrix>>> fine_;         // [xi][T][pair]
  std::vector<std::vector<std::vector<Eigen::MatrixXd>>> reduced_;   // [xi][T][pair]
  std::vector<Eigen::VectorXd> fine_load_;
  std::vector<Eigen::VectorXd> dirichlet_;
  std::vector<int> offsets_{0};
  std::uint64_t revision_ = 0;
};

inline ReducedSystem assemble_reduced(const AssembledSystem& sys, const std::vector<LocalReducedBasis>& bases) {
  return ReducedSystem(sys, bases);
}

/// Restriction of a fine vector to the local numbering of T.
inline Eigen::VectorXd restrict_to(const DGSpace& space, const Eigen::VectorXd& q, int T) {
  return q.segment(space.coarse_first_dof(T), space.coarse_size());
}

}  // namespace lrbms
