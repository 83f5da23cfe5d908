#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lrbms/errors.hpp"
#include "lrbms/estimate.hpp"
#include "lrbms/problems.hpp"
#include "lrbms/reconstruct.hpp"

using namespace lrbms;

namespace {

AssembledSystem unit_system(const DGSpace& space) {
  return assemble(space, AffineParametricScalar::constant(1.0),
                  DiffusionTensor::uniform(space.grid(), Eigen::Matrix2d::Identity()),
                  {SpatialFunction::constant(0.0), 0});
}

bool interior_triangle(const TwoLevelGrid& g, int t) {
  for (int e : g.triangle(t).faces)
    if (g.face(e).boundary) return false;
  return true;
}

}  // namespace

TEST(Oswald, ContinuousZeroTraceIsFixed) {
  TwoLevelGrid g({0, 0, 1, 1}, {2, 2}, {3, 3});
  DGSpace space(g, 1);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd r(space.size());
  for (auto& v : r) v = u(rng);
  const Eigen::VectorXd q = oswald_interpolate(space, r);
  EXPECT_LE((oswald_interpolate(space, q) - q).cwiseAbs().maxCoeff(), 1e-14);
  const auto sys = unit_system(space);
  for (double v : eta_nc(sys, q, {0.0})) EXPECT_LE(v, 1e-13);
}

TEST(Oswald, VertexAverage) {
  TwoLevelGrid g({0, 0, 1, 1}, {1, 1}, {2, 2});
  DGSpace space(g, 1);
  const Point center(0.5, 0.5);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(space.size());
  std::vector<int> around;
  for (int t = 0; t < g.num_triangles(); ++t) {
    const auto& v = g.triangle(t).vertices;
    double vals[3] = {0, 0, 0};
    bool touches = false;
    for (int k = 0; k < 3; ++k)
      if ((g.vertex(v[static_cast<std::size_t>(k)]) - center).norm() < 1e-14) {
        vals[k] = static_cast<double>(around.size());
        touches = true;
      }
    if (touches) around.push_back(t);
    space.set_affine(q, t, vals[0], vals[1], vals[2]);
  }
  ASSERT_EQ(around.size(), 6u);
  const Eigen::VectorXd o = oswald_interpolate(space, q);
  for (int t : around) EXPECT_NEAR(space.value(o, t, center), 2.5, 1e-14);
  // boundary vertices are zeroed
  EXPECT_NEAR(space.value(o, 0, Point(0, 0)), 0.0, 1e-14);
}

TEST(Oswald, HigherOrderUnsupported) {
  TwoLevelGrid g({0, 0, 1, 1}, {1, 1}, {1, 1});
  DGSpace space(g, 2);
  EXPECT_THROW(oswald_interpolate(space, Eigen::VectorXd::Zero(space.size())), UnsupportedError);
}

TEST(Flux, LinearPressureReproducesGradient) {
  TwoLevelGrid g({0, 0, 2, 1}, {2, 1}, {3, 3});
  DGSpace space(g, 1);
  const auto sys = unit_system(space);
  const Point grad(0.7, -1.3);
  const Eigen::VectorXd p = space.interpolate_affine([&](const Point& x) { return 0.2 + grad.dot(x); });
  const FluxField R = reconstruct_flux(sys, DiffusionTensor::uniform(g, Eigen::Matrix2d::Identity()), p, {0.0});
  for (int e = 0; e < g.num_faces(); ++e) {
    const auto& f = g.face(e);
    if (f.boundary) continue;
    EXPECT_NEAR(R.dof(e), -grad.dot(f.normal) * f.length, 1e-13);
  }
  for (int t = 0; t < g.num_triangles(); ++t) {
    if (!interior_triangle(g, t)) continue;
    EXPECT_LE((R.value(t, g.centroid(t)) + grad).norm(), 1e-12);
    EXPECT_NEAR(R.divergence(t), 0.0, 1e-11);
  }
  EXPECT_THROW(reconstruct_flux(sys, DiffusionTensor::uniform(g, Eigen::Matrix2d::Identity()), p, {0.0}, 1),
               UnsupportedError);
}

TEST(Flux, ZeroPressureZeroFlux) {
  TwoLevelGrid g({0, 0, 1, 1}, {2, 2}, {2, 2});
  DGSpace space(g, 1);
  const auto sys = unit_system(space);
  const auto R = reconstruct_flux(sys, DiffusionTensor::uniform(g, Eigen::Matrix2d::Identity()),
                                  Eigen::VectorXd::Zero(space.size()), {0.0});
  EXPECT_EQ(R.dofs().norm(), 0.0);
  for (int t = 0; t < g.num_triangles(); ++t) EXPECT_EQ(divergence(R, t), 0.0);
}

TEST(Flux, DivergenceTheorem) {
  TwoLevelGrid g({0, 0, 1, 1}, {1, 1}, {1, 1});
  const int t = 0;
  Eigen::VectorXd dofs = Eigen::VectorXd::Zero(g.num_faces());
  double perimeter = 0;
  for (int e : g.triangle(t).faces) {
    dofs(e) = g.orientation(t, e) * g.face(e).length;  // unit outward normal flux
    perimeter += g.face(e).length;
  }
  const FluxField R(g, dofs);
  EXPECT_NEAR(R.divergence(t), perimeter / g.triangle(t).area, 1e-14);
  EXPECT_NEAR(perimeter / g.triangle(t).area, (2 + std::sqrt(2.0)) / 0.5, 1e-14);
  // normal component of the field equals the face moment over the face length
  for (int e : g.triangle(t).faces) {
    const auto& f = g.face(e);
    const Point mid = 0.5 * (g.vertex(f.vertices[0]) + g.vertex(f.vertices[1]));
    EXPECT_NEAR(R.value(t, mid).dot(f.normal) * f.length, dofs(e), 1e-14);
  }
}

TEST(Flux, LocalConservation) {
  for (const auto& prob : {academic_problem(), channel_problem()}) {
    const auto d = prob.name == "academic" ? discretize(prob, {4, 4}, {4, 4}) : discretize(prob, {25, 5}, {2, 2});
    for (double m : {0.1, 1.0}) {
      const Parameter mu{m};
      const Eigen::VectorXd p = solve_detailed(*d->sys, mu);
      const auto defects = conservation_defects(*d->sys, reconstruct_flux(*d->sys, d->kappa, p, mu), mu);
      double fnorm = 0;
      for (int t = 0; t < d->grid->num_triangles(); ++t) {
        const double f = d->force.f(t, d->grid->centroid(t));
        fnorm += f * f * d->grid->triangle(t).area;
      }
      for (double v : defects) EXPECT_LE(std::abs(v), 1e-9 * std::max(1.0, std::sqrt(fnorm))) << prob.name;
    }
  }
}
