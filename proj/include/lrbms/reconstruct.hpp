#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lrbms/data.hpp"
#include "lrbms/dg_space.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/grid.hpp"
#include "lrbms/parallel.hpp"
#include "lrbms/quadrature.hpp"
#include "lrbms/swipdg.hpp"

namespace lrbms {

/// Conforming P1 function: vertex means of the DG traces, zero on the boundary.
inline Eigen::VectorXd oswald_interpolate(const DGSpace& space, const Eigen::VectorXd& q) {
  if (space.order() != 1) throw UnsupportedError("oswald_interpolate: only k = 1 is supported");
  const auto& grid = space.grid();
  std::vector<double> sum(static_cast<std::size_t>(grid.num_vertices()), 0.0);
  std::vector<int> count(sum.size(), 0);
  const Point corners[3] = {Point(0, 0), Point(1, 0), Point(0, 1)};
  for (int t = 0; t < grid.num_triangles(); ++t) {
    const auto& tri = grid.triangle(t);
    const auto block = q.segment(space.first_dof(t), space.local_size());
    for (int i = 0; i < 3; ++i) {
      const auto v = static_cast<std::size_t>(tri.vertices[static_cast<std::size_t>(i)]);
      sum[v] += block.dot(space.basis_values(corners[i]));
      ++count[v];
    }
  }
  std::vector<char> on_boundary(sum.size(), 0);
  for (const auto& f : grid.faces())
    if (f.boundary) on_boundary[static_cast<std::size_t>(f.vertices[0])] = on_boundary[static_cast<std::size_t>(f.vertices[1])] = 1;
  std::vector<double> nodal(sum.size());
  for (std::size_t v = 0; v < sum.size(); ++v) nodal[v] = on_boundary[v] ? 0.0 : sum[v] / count[v];

  Eigen::VectorXd out(space.size());
  for (int t = 0; t < grid.num_triangles(); ++t) {
    const auto& tri = grid.triangle(t);
    space.set_affine(out, t, nodal[static_cast<std::size_t>(tri.vertices[0])],
                     nodal[static_cast<std::size_t>(tri.vertices[1])], nodal[static_cast<std::size_t>(tri.vertices[2])]);
  }
  return out;
}

/// Lowest-order Raviart-Thomas field: one total normal flux (along n_e) per fine face.
class FluxField {
public:
  FluxField(const TwoLevelGrid& grid, Eigen::VectorXd dofs) : grid_(&grid), dofs_(std::move(dofs)) {}

  const TwoLevelGrid& grid() const { return *grid_; }
  const Eigen::VectorXd& dofs() const { return dofs_; }
  double dof(int e) const { return dofs_(e); }

  /// Total outflow of t divided by |t|.
  double divergence(int t) const {
    const auto& tri = grid_->triangle(t);
    double s = 0.0;
    for (int e : tri.faces) s += grid_->orientation(t, e) * dofs_(e);
    return s / tri.area;
  }

  Point value(int t, const Point& x) const {
    const auto& tri = grid_->triangle(t);
    Point r = Point::Zero();
    for (int i = 0; i < 3; ++i) {
      const int e = tri.faces[static_cast<std::size_t>(i)];
      const double outflow = grid_->orientation(t, e) * dofs_(e);
      r += outflow * (x - grid_->vertex(tri.vertices[static_cast<std::size_t>(i)])) / (2.0 * tri.area);
    }
    return r;
  }

private:
  const TwoLevelGrid* grid_;
  Eigen::VectorXd dofs_;
};

inline double divergence(const FluxField& flux, int t) { return flux.divergence(t); }

/// Face moments of the discrete flux: (R.n_e, 1)_e = b_c^e(p, 1) + b_p^e(p, 1).
inline FluxField reconstruct_flux(const AssembledSystem& sys, const DiffusionTensor& kappa,
                                  const Eigen::VectorXd& p, const Parameter& mu, int flux_order = 0) {
  if (flux_order != 0) throw UnsupportedError("reconstruct_flux: only the lowest-order (l = 0) space is implemented");
  const DGSpace& space = *sys.space;
  const auto& grid = space.grid();
  if (p.size() != space.size()) throw InvalidArgument("reconstruct_flux: dof vector has the wrong size");
  const int k = space.order(), nloc = space.local_size();
  const bool analytic = !sys.lambda.piecewise_constant();
  const auto rule = line_rule(2 * k + 1 + (analytic ? 2 : 0));
  Eigen::VectorXd dofs(grid.num_faces());
  parallel_for(static_cast<std::size_t>(grid.num_faces()), [&](std::size_t ei) {
    const int e = static_cast<int>(ei);
    const FineFace& f = grid.face(e);
    const Point& a = grid.vertex(f.vertices[0]);
    const Point& b = grid.vertex(f.vertices[1]);
    const int tri[2] = {f.minus, f.plus};
    const int sides = f.boundary ? 1 : 2;
    double delta[2] = {kappa.normal_diffusion(f.minus, f.normal), 0.0};
    double omega[2] = {1.0, 0.0}, sig_eps = delta[0];
    if (!f.boundary) {
      delta[1] = kappa.normal_diffusion(f.plus, f.normal);
      omega[0] = delta[1] / (delta[0] + delta[1]);
      omega[1] = delta[0] / (delta[0] + delta[1]);
      sig_eps = delta[0] * delta[1] / (delta[0] + delta[1]);
    }
    double total = 0.0;
    for (const auto& q : rule) {
      const Point x = a + q.position * (b - a);
      double mean_flux = 0.0, lam_mean = 0.0, jump = 0.0;
      for (int s = 0; s < sides; ++s) {
        const int t = tri[s];
        const Point ref = space.to_reference(t, x);
        const auto block = p.segment(space.first_dof(t), nloc);
        const double lam = sys.lambda(mu, t, x);
        const Point grad = space.basis_gradients(t, ref) * block;
        mean_flux += omega[s] * lam * f.normal.dot(kappa(t) * grad);
        lam_mean += omega[s] * lam;
        jump += (s == 0 ? 1.0 : -1.0) * block.dot(space.basis_values(ref));
      }
      total += q.weight * f.length * (-mean_flux + sys.sigma / f.length * lam_mean * sig_eps * jump);
    }
    dofs(e) = total;
  });
  return FluxField(grid, std::move(dofs));
}

/// (f, 1)_T from the load vector: the constant mode of every triangle of T.
inline double load_on_coarse(const AssembledSystem& sys, int T, const Eigen::VectorXd& load) {
  const DGSpace& space = *sys.space;
  const auto& grid = space.grid();
  double s = 0.0;
  for (int t = grid.first_triangle(T); t < grid.first_triangle(T) + grid.triangles_per_coarse(); ++t)
    s += load(space.first_dof(t));
  return s;
}

/// (div R - f, 1)_T for every coarse element.
inline std::vector<double> conservation_defects(const AssembledSystem& sys, const FluxField& flux,
                                                const Parameter& mu) {
  const auto& grid = sys.space->grid();
  const Eigen::VectorXd load = sys.load(mu);
  std::vector<double> out(static_cast<std::size_t>(grid.num_coarse()));
  for (int T = 0; T < grid.num_coarse(); ++T) {
    double div = 0.0;
    for (int t = grid.first_triangle(T); t < grid.first_triangle(T) + grid.triangles_per_coarse(); ++t)
      div += flux.divergence(t) * grid.triangle(t).area;
    out[static_cast<std::size_t>(T)] = div - load_on_coarse(sys, T, load);
  }
  return out;
}

}  // namespace lrbms
