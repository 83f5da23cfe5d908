#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lrbms/data.hpp"
#include "lrbms/dg_space.hpp"

namespace lrbms::oracle {

// ---------------------------------------------------------------------------
// Dense oracle for the weighted interior-penalty form on a single rectangle
// split into two triangles, written against hat functions (barycentric
// coordinates) instead of the library's monomial basis. Gradients are constant
// and traces linear, so every integral is evaluated in closed form.

struct OracleTri {
  std::array<Point, 3> x;
  Eigen::Matrix2d K;
  double lam;
  double area() const { return 0.5 * std::abs((x[1] - x[0]).x() * (x[2] - x[0]).y() - (x[1] - x[0]).y() * (x[2] - x[0]).x()); }
  Point centroid() const { return (x[0] + x[1] + x[2]) / 3.0; }
  // barycentric coordinate k at p
  double hat(int k, const Point& p) const {
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i) A.col(i) << 1.0, x[static_cast<std::size_t>(i)].x(), x[static_cast<std::size_t>(i)].y();
    const Eigen::Vector3d b = A.inverse() * Eigen::Vector3d(1.0, p.x(), p.y());
    return b(k);
  }
  Point grad(int k) const {
    const double h0 = hat(k, Point(0, 0));
    return Point(hat(k, Point(1, 0)) - h0, hat(k, Point(0, 1)) - h0);
  }
};

struct OracleOptions {
  double sigma = 8.0;
  double theta = 1.0;
  bool arithmetic_weights = false;  // plain SIPG averages
};

inline Eigen::MatrixXd oracle_matrix(const std::array<OracleTri, 2>& T, const OracleOptions& o) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6, 6);
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        M(3 * s + i, 3 * s + j) += T[s].area() * T[s].lam * T[s].grad(i).dot(T[s].K * T[s].grad(j));

  auto same = [](const Point& a, const Point& b) { return (a - b).norm() < 1e-12; };
  // edges of both triangles; the diagonal is shared
  struct Edge { Point a, b; int side[2]; };
  std::vector<Edge> edges;
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < 3; ++k) {
      const Point a = T[s].x[static_cast<std::size_t>(k)], b = T[s].x[static_cast<std::size_t>((k + 1) % 3)];
      bool found = false;
      for (auto& e : edges)
        if ((same(e.a, a) && same(e.b, b)) || (same(e.a, b) && same(e.b, a))) {
          e.side[1] = s;
          found = true;
        }
      if (!found) edges.push_back({a, b, {s, -1}});
    }
  if (edges.size() != 5) throw std::logic_error("oracle: expected 5 edges");

  for (const auto& e : edges) {
    const Point d = e.b - e.a;
    const double len = d.norm();
    Point n(d.y() / len, -d.x() / len);
    const Point mid = 0.5 * (e.a + e.b);
    if ((T[e.side[0]].centroid() - mid).dot(n) > 0) n = -n;  // out of side 0
    const int sides = e.side[1] < 0 ? 1 : 2;
    double delta[2] = {n.dot(T[e.side[0]].K * n), 0}, w[2] = {1, 0}, sig_eps = delta[0];
    if (sides == 2) {
      delta[1] = n.dot(T[e.side[1]].K * n);
      if (o.arithmetic_weights) {
        w[0] = w[1] = 0.5;
        sig_eps = 0.5 * delta[0];
      } else {
        w[0] = delta[1] / (delta[0] + delta[1]);
        w[1] = delta[0] / (delta[0] + delta[1]);
        sig_eps = delta[0] * delta[1] / (delta[0] + delta[1]);
      }
    }
    double lam_avg = 0;
    for (int r = 0; r < sides; ++r) lam_avg += w[r] * T[e.side[r]].lam;
    const double pen = o.sigma / len * lam_avg * sig_eps;
    // the symmetrization switch only acts inside the subdomain; boundary faces stay symmetric
    const double th = sides == 2 ? o.theta : 1.0;
    // trial (s, j) and test (r, i); jump sign +1 on side 0, -1 on side 1
    for (int r = 0; r < sides; ++r)
      for (int i = 0; i < 3; ++i)
        for (int s = 0; s < sides; ++s)
          for (int j = 0; j < 3; ++j) {
            const OracleTri& tr = T[e.side[r]];
            const OracleTri& ts = T[e.side[s]];
            const double sr = r == 0 ? 1 : -1, ss = s == 0 ? 1 : -1;
            const double va_i = tr.hat(i, e.a), vb_i = tr.hat(i, e.b);
            const double va_j = ts.hat(j, e.a), vb_j = ts.hat(j, e.b);
            const double int_i = len * 0.5 * (va_i + vb_i), int_j = len * 0.5 * (va_j + vb_j);
            const double int_ij = len / 6.0 * (2 * va_i * va_j + va_i * vb_j + vb_i * va_j + 2 * vb_i * vb_j);
            const double flux_j = w[s] * ts.lam * n.dot(ts.K * ts.grad(j));
            const double flux_i = w[r] * tr.lam * n.dot(tr.K * tr.grad(i));
            double v = -flux_j * sr * int_i - th * flux_i * ss * int_j + pen * sr * ss * int_ij;
            M(3 * e.side[r] + i, 3 * e.side[s] + j) += v;
          }
  }
  return M;
}

// library dofs of each oracle hat function
inline Eigen::MatrixXd hats_in_library_basis(const DGSpace& space, const std::array<OracleTri, 2>& T) {
  const auto& g = space.grid();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(space.size(), 6);
  for (int s = 0; s < 2; ++s) {
    const int t = g.locate(T[s].centroid());
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd q = Eigen::VectorXd::Zero(space.size());
      const auto& v = g.triangle(t).vertices;
      space.set_affine(q, t, T[s].hat(k, g.vertex(v[0])), T[s].hat(k, g.vertex(v[1])), T[s].hat(k, g.vertex(v[2])));
      C.col(3 * s + k) = q;
    }
  }
  return C;
}

struct TwoTriangleCase {
  TwoLevelGrid grid{{0, 0, 2, 1}, {1, 1}, {1, 1}};
  DGSpace space{grid, 1};
  std::array<OracleTri, 2> tris;
  // per library triangle
  std::vector<Eigen::Matrix2d> K;
  std::vector<double> c;

  TwoTriangleCase(const Eigen::Matrix2d& KA, const Eigen::Matrix2d& KB, double cA, double cB) {
    tris[0] = {{Point(0, 0), Point(2, 0), Point(2, 1)}, KA, 0};
    tris[1] = {{Point(0, 0), Point(2, 1), Point(0, 1)}, KB, 0};
    K.resize(2);
    c.resize(2);
    for (int s = 0; s < 2; ++s) {
      const int t = grid.locate(tris[static_cast<std::size_t>(s)].centroid());
      K[static_cast<std::size_t>(t)] = s == 0 ? KA : KB;
      c[static_cast<std::size_t>(t)] = s == 0 ? cA : cB;
    }
  }
  AffineParametricScalar lambda() const {
    return AffineParametricScalar({SpatialFunction::constant(1.0), SpatialFunction(c)},
                                  {[](const Parameter&) { return 1.0; }, [](const Parameter& mu) { return mu[0]; }});
  }
  void set_mu(double mu) {
    for (int s = 0; s < 2; ++s) {
      const int t = grid.locate(tris[static_cast<std::size_t>(s)].centroid());
      tris[static_cast<std::size_t>(s)].lam = 1.0 + mu * c[static_cast<std::size_t>(t)];
    }
  }
};

}  // namespace lrbms::oracle
