#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "lrbms/data.hpp"
#include "lrbms/dg_space.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/grid.hpp"
#include "lrbms/parallel.hpp"
#include "lrbms/quadrature.hpp"

namespace lrbms {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

inline double default_penalty(int order) { return 8.0 * order * order; }

struct AssemblyOptions {
  std::optional<double> sigma;         // defaults to default_penalty(k)
  std::vector<int> theta_sym;          // per coarse element; empty means 1 everywhere
  std::optional<SpatialFunction> dirichlet;  // boundary data g; homogeneous if unset
};

/// Per-component operators of b_h and the load l, all sharing one sparsity pattern.
struct AssembledSystem {
  const DGSpace* space = nullptr;
  AffineParametricScalar lambda;
  double sigma = 0.0;
  std::vector<int> theta_sym;

  std::vector<SparseMatrix> full;     // B_xi = volume + coupling + penalty
  std::vector<SparseMatrix> volume;   // block diagonal per triangle
  std::vector<SparseMatrix> penalty;  // face penalty terms only
  Eigen::VectorXd load_f;             // (f, q)
  std::vector<Eigen::VectorXd> load_dirichlet;  // per component, zero for homogeneous data

  std::size_t components() const { return full.size(); }

  SparseMatrix combine(const std::vector<SparseMatrix>& parts, const Parameter& mu) const {
    SparseMatrix out = parts.front();
    const auto th = lambda.thetas(mu);
    const Eigen::Index nnz = out.nonZeros();
    Eigen::Map<Eigen::VectorXd> dst(out.valuePtr(), nnz);
    dst *= th[0];
    for (std::size_t xi = 1; xi < parts.size(); ++xi)
      dst += th[xi] * Eigen::Map<const Eigen::VectorXd>(parts[xi].valuePtr(), nnz);
    return out;
  }

  SparseMatrix matrix(const Parameter& mu) const { return combine(full, mu); }
  SparseMatrix volume_matrix(const Parameter& mu) const { return combine(volume, mu); }

  /// Volume plus penalty: the local inner product used for the reduced bases.
  SparseMatrix product_matrix(const Parameter& mu) const {
    SparseMatrix v = volume_matrix(mu);
    SparseMatrix p = combine(penalty, mu);
    return v + p;
  }

  Eigen::VectorXd load(const Parameter& mu) const {
    Eigen::VectorXd l = load_f;
    const auto th = lambda.thetas(mu);
    for (std::size_t xi = 0; xi < load_dirichlet.size(); ++xi)
      if (load_dirichlet[xi].size()) l += th[xi] * load_dirichlet[xi];
    return l;
  }
};

namespace detail {

struct TripletChunks {
  explicit TripletChunks(std::size_t parts, std::size_t components)
      : full(parts, std::vector<std::vector<Triplet>>(components)),
        volume(parts, std::vector<std::vector<Triplet>>(components)),
        penalty(parts, std::vector<std::vector<Triplet>>(components)) {}
  std::vector<std::vector<std::vector<Triplet>>> full, volume, penalty;
};

inline SparseMatrix from_chunks(int n, const std::vector<std::vector<std::vector<Triplet>>>& chunks,
                                std::size_t xi) {
  std::size_t total = 0;
  for (const auto& c : chunks) total += c[xi].size();
  std::vector<Triplet> all;
  all.reserve(total);
  for (const auto& c : chunks) all.insert(all.end(), c[xi].begin(), c[xi].end());
  SparseMatrix m(n, n);
  m.setFromTriplets(all.begin(), all.end());
  m.makeCompressed();
  return m;
}

inline int face_theta(const TwoLevelGrid& grid, const FineFace& f, const std::vector<int>& theta_sym) {
  if (f.boundary || f.coarse_face != kNone || theta_sym.empty()) return 1;
  return theta_sym[static_cast<std::size_t>(grid.triangle(f.minus).coarse)];
}

}  // namespace detail

inline AssembledSystem assemble(const DGSpace& space, const AffineParametricScalar& lambda,
                                const DiffusionTensor& kappa, const ForceField& force,
                                const AssemblyOptions& opts = {}) {
  const auto& grid = space.grid();
  const int k = space.order(), nloc = space.local_size(), n = space.size();
  const double sigma = opts.sigma.value_or(default_penalty(k));
  if (!(sigma >= 1.0)) throw InvalidArgument("assemble: penalty parameter sigma must be >= 1");
  if (static_cast<int>(kappa.size()) != grid.num_triangles())
    throw InvalidArgument("assemble: diffusion tensor does not match the grid");
  if (!opts.theta_sym.empty()) {
    if (static_cast<int>(opts.theta_sym.size()) != grid.num_coarse())
      throw InvalidArgument("assemble: need one symmetry flag per coarse element");
    for (int th : opts.theta_sym)
      if (th < -1 || th > 1) throw InvalidArgument("assemble: symmetry flag must be -1, 0 or 1");
  }
  const std::size_t nxi = lambda.size();

  AssembledSystem sys;
  sys.space = &space;
  sys.lambda = lambda;
  sys.sigma = sigma;
  sys.theta_sym = opts.theta_sym;

  const bool analytic = !lambda.piecewise_constant();
  const auto vol_rule = triangle_rule(2 * k + (analytic ? 2 : 0));
  const auto face_rule = line_rule(2 * k + 1 + (analytic ? 2 : 0));
  const auto load_rule = triangle_rule(force.f.piecewise_constant() ? k : 2 * k + 2 + force.order_hint);

  const std::size_t parts = static_cast<std::size_t>(std::max(1, num_threads()));
  detail::TripletChunks chunks(parts, nxi);
  sys.load_f = Eigen::VectorXd::Zero(n);
  std::vector<std::vector<Eigen::VectorXd>> dir_load(parts);
  if (opts.dirichlet)
    for (auto& d : dir_load) d.assign(nxi, Eigen::VectorXd::Zero(n));

  // volume terms and load
  const int nt = grid.num_triangles();
  parallel_for(parts, [&](std::size_t part) {
    const int begin = static_cast<int>(part * static_cast<std::size_t>(nt) / parts);
    const int end = static_cast<int>((part + 1) * static_cast<std::size_t>(nt) / parts);
    std::vector<Eigen::MatrixXd> local(nxi);
    for (int t = begin; t < end; ++t) {
      const double jac = 2.0 * grid.triangle(t).area;
      const Eigen::Matrix2d& K = kappa(t);
      for (auto& m : local) m.setZero(nloc, nloc);
      for (const auto& q : vol_rule) {
        const Point x = space.to_physical(t, q.position);
        const Eigen::Matrix2Xd G = space.basis_gradients(t, q.position);
        const Eigen::MatrixXd KG = K * G;
        for (std::size_t xi = 0; xi < nxi; ++xi)
          local[xi].noalias() += (q.weight * jac * lambda.component_value(xi, t, x)) * (G.transpose() * KG);
      }
      const int o = space.first_dof(t);
      for (std::size_t xi = 0; xi < nxi; ++xi)
        for (int j = 0; j < nloc; ++j)
          for (int i = 0; i < nloc; ++i) {
            chunks.volume[part][xi].emplace_back(o + i, o + j, local[xi](i, j));
            chunks.full[part][xi].emplace_back(o + i, o + j, local[xi](i, j));
          }
      Eigen::VectorXd lf = Eigen::VectorXd::Zero(nloc);
      for (const auto& q : load_rule) {
        const Point x = space.to_physical(t, q.position);
        lf += (q.weight * jac * force.f(t, x)) * space.basis_values(q.position);
      }
      sys.load_f.segment(o, nloc) = lf;
    }
  });

  // face terms
  const int nf = grid.num_faces();
  parallel_for(parts, [&](std::size_t part) {
    const int begin = static_cast<int>(part * static_cast<std::size_t>(nf) / parts);
    const int end = static_cast<int>((part + 1) * static_cast<std::size_t>(nf) / parts);
    for (int e = begin; e < end; ++e) {
      const FineFace& f = grid.face(e);
      const Point& a = grid.vertex(f.vertices[0]);
      const Point& b = grid.vertex(f.vertices[1]);
      const Point& nrm = f.normal;
      const int theta = detail::face_theta(grid, f, opts.theta_sym);
      const int sides = f.boundary ? 1 : 2;
      const int tri[2] = {f.minus, f.plus};
      double delta[2] = {kappa.normal_diffusion(f.minus, nrm), 0.0};
      if (!(delta[0] > 0.0)) throw DomainError("nonpositive normal diffusion on face " + std::to_string(e));
      double omega[2] = {1.0, 0.0}, sig_eps = delta[0];
      if (!f.boundary) {
        delta[1] = kappa.normal_diffusion(f.plus, nrm);
        if (!(delta[1] > 0.0)) throw DomainError("nonpositive normal diffusion on face " + std::to_string(e));
        omega[0] = delta[1] / (delta[0] + delta[1]);
        omega[1] = delta[0] / (delta[0] + delta[1]);
        sig_eps = delta[0] * delta[1] / (delta[0] + delta[1]);
      }
      const double sign[2] = {1.0, -1.0};
      // blocks[xi][r][s]: rows on side r, columns on side s
      std::vector<std::array<std::array<Eigen::MatrixXd, 2>, 2>> cpl(nxi), pen(nxi);
      for (std::size_t xi = 0; xi < nxi; ++xi)
        for (int r = 0; r < 2; ++r)
          for (int s = 0; s < 2; ++s) {
            cpl[xi][r][s].setZero(nloc, nloc);
            pen[xi][r][s].setZero(nloc, nloc);
          }
      for (const auto& q : face_rule) {
        const Point x = a + q.position * (b - a);
        const double w = q.weight * f.length;
        Eigen::VectorXd phi[2];
        Eigen::VectorXd flux[2];  // (kappa grad phi) . n
        for (int s = 0; s < sides; ++s) {
          const Point ref = space.to_reference(tri[s], x);
          phi[s] = space.basis_values(ref);
          flux[s] = (kappa(tri[s]) * space.basis_gradients(tri[s], ref)).transpose() * nrm;
        }
        for (std::size_t xi = 0; xi < nxi; ++xi) {
          double lam[2] = {lambda.component_value(xi, tri[0], x), 0.0};
          if (sides == 2) lam[1] = lambda.component_value(xi, tri[1], x);
          const double lam_mean = omega[0] * lam[0] + omega[1] * lam[1];
          const double pen_w = w * sigma / f.length * lam_mean * sig_eps;
          for (int r = 0; r < sides; ++r)
            for (int s = 0; s < sides; ++s) {
              cpl[xi][r][s].noalias() -= (w * omega[s] * lam[s] * sign[r]) * phi[r] * flux[s].transpose();
              cpl[xi][r][s].noalias() -= (theta * w * omega[r] * lam[r] * sign[s]) * flux[r] * phi[s].transpose();
              pen[xi][r][s].noalias() += (pen_w * sign[r] * sign[s]) * phi[r] * phi[s].transpose();
            }
          if (f.boundary && opts.dirichlet) {
            const double g = (*opts.dirichlet)(tri[0], x);
            const int o = space.first_dof(tri[0]);
            dir_load[part][xi].segment(o, nloc) +=
                (pen_w * g) * phi[0] - (theta * w * lam[0] * g) * flux[0];
          }
        }
      }
      for (std::size_t xi = 0; xi < nxi; ++xi)
        for (int r = 0; r < sides; ++r)
          for (int s = 0; s < sides; ++s) {
            const int orow = space.first_dof(tri[r]), ocol = space.first_dof(tri[s]);
            for (int j = 0; j < nloc; ++j)
              for (int i = 0; i < nloc; ++i) {
                const double c = cpl[xi][r][s](i, j), p = pen[xi][r][s](i, j);
                chunks.full[part][xi].emplace_back(orow + i, ocol + j, c + p);
                chunks.penalty[part][xi].emplace_back(orow + i, ocol + j, p);
              }
          }
    }
  });

  for (std::size_t xi = 0; xi < nxi; ++xi) {
    sys.full.push_back(detail::from_chunks(n, chunks.full, xi));
    sys.volume.push_back(detail::from_chunks(n, chunks.volume, xi));
    sys.penalty.push_back(detail::from_chunks(n, chunks.penalty, xi));
  }
  sys.load_dirichlet.assign(nxi, Eigen::VectorXd());
  if (opts.dirichlet)
    for (std::size_t xi = 0; xi < nxi; ++xi) {
      sys.load_dirichlet[xi] = Eigen::VectorXd::Zero(n);
      for (const auto& d : dir_load) sys.load_dirichlet[xi] += d[xi];
    }
  return sys;
}

enum class SolverKind { direct, conjugate_gradient };

inline double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double r = (A * x - b).norm();
  return nb > 0.0 ? r / nb : r;
}

/// Solves A x = b to the given relative residual, with a few refinement sweeps if needed.
inline Eigen::VectorXd solve_sparse(const SparseMatrix& A, const Eigen::VectorXd& b, bool symmetric,
                                    SolverKind kind = SolverKind::direct, double tol = 1e-10) {
  if (b.norm() == 0.0) return Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd x;
  if (kind == SolverKind::conjugate_gradient) {
    if (!symmetric) throw InvalidArgument("conjugate gradients need a symmetric system");
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(0.1 * tol);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * A.rows()));
    cg.compute(A);
    x = cg.solve(b);
    if (cg.info() != Eigen::Success || relative_residual(A, x, b) > tol)
      throw CoercivityError("conjugate gradient iteration failed to converge; the form may not be coercive, "
                            "try a larger penalty sigma");
    return x;
  }
  if (symmetric) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
      throw CoercivityError("system matrix is not positive definite; try a larger penalty sigma");
    x = ldlt.solve(b);
    for (int sweep = 0; sweep < 3 && relative_residual(A, x, b) > tol; ++sweep) x += ldlt.solve(b - A * x);
  } else {
    Eigen::SparseLU<SparseMatrix> lu(A);
    if (lu.info() != Eigen::Success) throw CoercivityError("system matrix is singular; try a larger penalty sigma");
    x = lu.solve(b);
    for (int sweep = 0; sweep < 3 && relative_residual(A, x, b) > tol; ++sweep) x += lu.solve(b - A * x);
  }
  if (!x.allFinite() || relative_residual(A, x, b) > tol)
    throw SolverError("sparse solve missed the residual target");
  return x;
}

inline bool is_symmetric_form(const AssembledSystem& sys) {
  return std::all_of(sys.theta_sym.begin(), sys.theta_sym.end(), [](int t) { return t == 1; });
}

inline Eigen::VectorXd solve_detailed(const AssembledSystem& sys, const Parameter& mu,
                                      SolverKind kind = SolverKind::direct) {
  return solve_sparse(sys.matrix(mu), sys.load(mu), is_symmetric_form(sys), kind);
}

/// Volume-only energy seminorm with lambda(mu_ref); scope is a coarse id or kNone for global.
inline double energy_norm(const AssembledSystem& sys, const Eigen::VectorXd& q, const Parameter& mu_ref,
                          int scope = kNone) {
  const auto& space = *sys.space;
  const auto th = sys.lambda.thetas(mu_ref);
  double s = 0.0;
  if (scope == kNone) {
    for (std::size_t xi = 0; xi < sys.components(); ++xi) s += th[xi] * q.dot(sys.volume[xi] * q);
  } else {
    const int o = space.coarse_first_dof(scope), m = space.coarse_size();
    const Eigen::VectorXd qT = q.segment(o, m);
    for (std::size_t xi = 0; xi < sys.components(); ++xi)
      s += th[xi] * qT.dot(sys.volume[xi].block(o, o, m, m) * qT);
  }
  return std::sqrt(std::max(0.0, s));
}

/// Per coarse element energy seminorm values.
inline std::vector<double> local_energy_norms(const AssembledSystem& sys, const Eigen::VectorXd& q,
                                              const Parameter& mu_ref) {
  const auto& space = *sys.space;
  const SparseMatrix V = sys.volume_matrix(mu_ref);
  const Eigen::VectorXd Vq = V * q;
  std::vector<double> out(static_cast<std::size_t>(space.grid().num_coarse()));
  for (int T = 0; T < space.grid().num_coarse(); ++T) {
    const int o = space.coarse_first_dof(T), m = space.coarse_size();
    out[static_cast<std::size_t>(T)] = std::sqrt(std::max(0.0, q.segment(o, m).dot(Vq.segment(o, m))));
  }
  return out;
}

/// Dof indices of the union of the given coarse elements, ascending.
inline std::vector<int> patch_dofs(const DGSpace& space, std::vector<int> patch) {
  std::sort(patch.begin(), patch.end());
  std::vector<int> dofs;
  dofs.reserve(patch.size() * static_cast<std::size_t>(space.coarse_size()));
  for (int T : patch)
    for (int i = 0; i < space.coarse_size(); ++i) dofs.push_back(space.coarse_first_dof(T) + i);
  return dofs;
}

struct PatchSystem {
  std::vector<int> dofs;  // global dof of each local unknown
  SparseMatrix matrix;
  Eigen::VectorXd load;

  Eigen::VectorXd to_global(const Eigen::VectorXd& local, int n) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < dofs.size(); ++i) out(dofs[i]) = local(static_cast<Eigen::Index>(i));
    return out;
  }
};

/// Global form restricted to the patch unknowns; the values of dirichlet_data on
/// triangles outside the patch enter through the face terms on the patch boundary.
/// B and L are the global operator and load at the parameter of interest.
inline PatchSystem assemble_patch(const DGSpace& space, const SparseMatrix& B, const Eigen::VectorXd& L,
                                  const std::vector<int>& patch, const Eigen::VectorXd& dirichlet_data) {
  if (patch.empty()) throw InvalidArgument("assemble_patch: empty patch");
  const int n = space.size();
  if (dirichlet_data.size() != n) throw InvalidArgument("assemble_patch: data vector has the wrong size");
  PatchSystem ps;
  ps.dofs = patch_dofs(space, patch);
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < ps.dofs.size(); ++i) local[static_cast<std::size_t>(ps.dofs[i])] = static_cast<int>(i);

  const int m = static_cast<int>(ps.dofs.size());
  std::vector<Triplet> trip;
  ps.load.resize(m);
  for (int i = 0; i < m; ++i) ps.load(i) = L(ps.dofs[static_cast<std::size_t>(i)]);
  // columns outside the patch carry the exterior data into the load
  for (int j = 0; j < n; ++j) {
    const int jj = local[static_cast<std::size_t>(j)];
    const double g = dirichlet_data(j);
    for (SparseMatrix::InnerIterator it(B, j); it; ++it) {
      const int ii = local[static_cast<std::size_t>(it.row())];
      if (ii < 0) continue;
      if (jj >= 0)
        trip.emplace_back(ii, jj, it.value());
      else
        ps.load(ii) -= it.value() * g;
    }
  }
  ps.matrix.resize(m, m);
  ps.matrix.setFromTriplets(trip.begin(), trip.end());
  ps.matrix.makeCompressed();
  return ps;
}

inline PatchSystem assemble_patch(const AssembledSystem& sys, const std::vector<int>& patch,
                                  const Eigen::VectorXd& dirichlet_data, const Parameter& mu) {
  return assemble_patch(*sys.space, sys.matrix(mu), sys.load(mu), patch, dirichlet_data);
}

}  // namespace lrbms
