#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrbms/errors.hpp"
#include "lrbms/grid.hpp"

namespace lrbms {

/// Discontinuous P_k space: monomials xi^a eta^b on the reference triangle,
/// affinely mapped. Dof blocks follow triangle ids, hence are contiguous per
/// coarse element.
class DGSpace {
public:
  DGSpace(const TwoLevelGrid& grid, int order) : grid_(&grid), order_(order) {
    if (order < 1) throw InvalidArgument("DGSpace: polynomial order must be >= 1");
    for (int d = 0; d <= order; ++d)
      for (int b = 0; b <= d; ++b) exponents_.emplace_back(d - b, b);
    maps_.resize(static_cast<std::size_t>(grid.num_triangles()));
    for (int t = 0; t < grid.num_triangles(); ++t) {
      const auto& tri = grid.triangle(t);
      auto& m = maps_[static_cast<std::size_t>(t)];
      m.origin = grid.vertex(tri.vertices[0]);
      m.jacobian.col(0) = grid.vertex(tri.vertices[1]) - m.origin;
      m.jacobian.col(1) = grid.vertex(tri.vertices[2]) - m.origin;
      m.inverse = m.jacobian.inverse();
    }
  }

  const TwoLevelGrid& grid() const { return *grid_; }
  int order() const { return order_; }
  int local_size() const { return static_cast<int>(exponents_.size()); }
  int size() const { return local_size() * grid_->num_triangles(); }
  int first_dof(int t) const { return t * local_size(); }

  int coarse_first_dof(int T) const { return grid_->first_triangle(T) * local_size(); }
  int coarse_size() const { return grid_->triangles_per_coarse() * local_size(); }

  Point to_physical(int t, const Point& ref) const {
    const auto& m = maps_[static_cast<std::size_t>(t)];
    return m.origin + m.jacobian * ref;
  }
  Point to_reference(int t, const Point& x) const {
    const auto& m = maps_[static_cast<std::size_t>(t)];
    return m.inverse * (x - m.origin);
  }

  Eigen::VectorXd basis_values(const Point& ref) const {
    Eigen::VectorXd v(local_size());
    for (int i = 0; i < local_size(); ++i) {
      const auto [a, b] = exponents_[static_cast<std::size_t>(i)];
      v(i) = ipow(ref.x(), a) * ipow(ref.y(), b);
    }
    return v;
  }

  /// Physical gradients, one column per basis function.
  Eigen::Matrix2Xd basis_gradients(int t, const Point& ref) const {
    Eigen::Matrix2Xd g(2, local_size());
    for (int i = 0; i < local_size(); ++i) {
      const auto [a, b] = exponents_[static_cast<std::size_t>(i)];
      g(0, i) = a ? a * ipow(ref.x(), a - 1) * ipow(ref.y(), b) : 0.0;
      g(1, i) = b ? b * ipow(ref.x(), a) * ipow(ref.y(), b - 1) : 0.0;
    }
    return maps_[static_cast<std::size_t>(t)].inverse.transpose() * g;
  }

  double value(const Eigen::VectorXd& q, int t, const Point& x) const {
    return q.segment(first_dof(t), local_size()).dot(basis_values(to_reference(t, x)));
  }
  Point gradient(const Eigen::VectorXd& q, int t, const Point& x) const {
    return basis_gradients(t, to_reference(t, x)) * q.segment(first_dof(t), local_size());
  }

  /// Dofs of the element-wise affine function a + b.x with vertex values given.
  /// Only the first three (affine) coefficients are nonzero.
  void set_affine(Eigen::VectorXd& q, int t, double v0, double v1, double v2) const {
    auto block = q.segment(first_dof(t), local_size());
    block.setZero();
    block(0) = v0;
    block(1) = v1 - v0;
    block(2) = v2 - v0;
  }

  /// Interpolates a globally affine function exactly.
  template <class Fn>
  Eigen::VectorXd interpolate_affine(Fn&& fn) const {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(size());
    for (int t = 0; t < grid_->num_triangles(); ++t) {
      const auto& tri = grid_->triangle(t);
      set_affine(q, t, fn(grid_->vertex(tri.vertices[0])), fn(grid_->vertex(tri.vertices[1])),
                 fn(grid_->vertex(tri.vertices[2])));
    }
    return q;
  }

private:
  struct AffineMap {
    Point origin;
    Eigen::Matrix2d jacobian;
    Eigen::Matrix2d inverse;
  };

  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  const TwoLevelGrid* grid_;
  int order_;
  std::vector<std::pair<int, int>> exponents_;
  std::vector<AffineMap> maps_;
};

}  // namespace lrbms
