#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lrbms/data.hpp"
#include "lrbms/dg_space.hpp"
#include "lrbms/estimate.hpp"
#include "lrbms/grid.hpp"
#include "lrbms/swipdg.hpp"

namespace lrbms {

/// Data of an elliptic test problem, instantiated on a concrete grid on demand.
struct Problem {
  std::string name;
  Rectangle domain;
  ParameterSpace parameters;
  std::function<AffineParametricScalar(const TwoLevelGrid&)> make_lambda;
  std::function<DiffusionTensor(const TwoLevelGrid&)> make_kappa;
  std::function<ForceField(const TwoLevelGrid&)> make_force;
  // gradient of the exact solution at exact_parameter, if known
  std::function<Eigen::Vector2d(const Point&)> exact_gradient;
  std::optional<Parameter> exact_parameter;
};

/// cos(pi x/2) cos(pi y/2) on [-1,1]^2 with lambda = 1 + (1 - mu) cos cos, kappa = id.
inline Problem academic_problem() {
  using std::numbers::pi;
  Problem p;
  p.name = "academic";
  p.domain = {-1.0, -1.0, 1.0, 1.0};
  p.parameters = ParameterSpace({0.1}, {1.0});
  p.make_lambda = [](const TwoLevelGrid&) {
    auto bump = [](const Point& x) { return std::cos(0.5 * pi * x.x()) * std::cos(0.5 * pi * x.y()); };
    return AffineParametricScalar({SpatialFunction::constant(1.0), SpatialFunction(bump)},
                                  {[](const Parameter&) { return 1.0; }, [](const Parameter& mu) { return 1.0 - mu[0]; }});
  };
  p.make_kappa = [](const TwoLevelGrid& g) { return DiffusionTensor::uniform(g, Eigen::Matrix2d::Identity()); };
  p.make_force = [](const TwoLevelGrid&) {
    return ForceField{SpatialFunction([](const Point& x) {
                        return 0.5 * pi * pi * std::cos(0.5 * pi * x.x()) * std::cos(0.5 * pi * x.y());
                      }),
                      2};
  };
  p.exact_gradient = [](const Point& x) {
    const double cx = std::cos(0.5 * pi * x.x()), cy = std::cos(0.5 * pi * x.y());
    const double sx = std::sin(0.5 * pi * x.x()), sy = std::sin(0.5 * pi * x.y());
    return Eigen::Vector2d(-0.5 * pi * sx * cy, -0.5 * pi * cx * sy);
  };
  p.exact_parameter = Parameter{1.0};
  return p;
}

namespace channel {

inline constexpr int kCols = 100, kRows = 20;
inline constexpr double kContrast = 1e3;
inline constexpr double kSegmentBoost = 110.0;  // lambda(0.1) = 1 + 0.9 * 110 = 100 on the segment

/// Synthetic 100 x 20 permeability: random background in [1, 3] crossed by
/// two meandering high-conductivity channels. Row-major from the bottom left.
inline std::vector<double> permeability(std::uint64_t seed = 10) {
  std::mt19937_64 rng(seed);
  std::vector<double> k(static_cast<std::size_t>(kCols * kRows));
  for (auto& v : k) v = 1.0 + 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  auto carve = [&](auto row_of) {
    int prev = row_of(0);
    for (int i = 0; i < kCols; ++i) {
      const int r = row_of(i);
      for (int j = std::min(prev, r); j <= std::max(prev, r); ++j)
        k[static_cast<std::size_t>(j * kCols + i)] = kContrast;
      prev = r;
    }
  };
  carve([](int i) { return 5 + static_cast<int>(std::lround(2.0 * std::sin(2.0 * std::numbers::pi * i / 50.0))); });
  carve([](int i) { return 14 + static_cast<int>(std::lround(2.0 * std::sin(2.0 * std::numbers::pi * i / 40.0 + 1.0))); });
  return k;
}

/// Indicator-like channel segment toggled by the parameter, in file cells.
inline std::vector<double> segment() {
  std::vector<double> c(static_cast<std::size_t>(kCols * kRows), 0.0);
  for (int j = 9; j < 11; ++j)
    for (int i = 50; i < 70; ++i) c[static_cast<std::size_t>(j * kCols + i)] = kSegmentBoost;
  return c;
}

inline double force(const Point& x) {
  auto in = [&](double a, double b, double c, double d) { return x.x() > a && x.x() < b && x.y() > c && x.y() < d; };
  if (in(0.95, 1.10, 0.30, 0.45)) return 2e3;
  if (in(3.00, 3.15, 0.75, 0.90) || in(4.25, 4.40, 0.25, 0.40)) return -1e3;
  return 0.0;
}

}  // namespace channel

/// Desk-scale multi-scale problem on [0,5] x [0,1]; the permeability file, when
/// given, replaces the synthetic field.
inline Problem channel_problem(std::optional<std::string> permeability_file = std::nullopt,
                               int cols = channel::kCols, int rows = channel::kRows) {
  Problem p;
  p.name = "channel";
  p.domain = {0.0, 0.0, 5.0, 1.0};
  p.parameters = ParameterSpace({0.1}, {1.0});
  p.make_lambda = [](const TwoLevelGrid& g) {
    const auto seg = map_cells_to_triangles(channel::segment(), g, channel::kCols, channel::kRows);
    return AffineParametricScalar({SpatialFunction::constant(1.0), SpatialFunction(seg)},
                                  {[](const Parameter&) { return 1.0; }, [](const Parameter& mu) { return 1.0 - mu[0]; }});
  };
  p.make_kappa = [file = std::move(permeability_file), cols, rows](const TwoLevelGrid& g) {
    if (file) return ingest_permeability(*file, g, cols, rows);
    return DiffusionTensor::isotropic(map_cells_to_triangles(channel::permeability(), g, channel::kCols, channel::kRows));
  };
  p.make_force = [](const TwoLevelGrid& g) {
    std::vector<double> f(static_cast<std::size_t>(g.num_triangles()));
    for (int t = 0; t < g.num_triangles(); ++t) f[static_cast<std::size_t>(t)] = channel::force(g.centroid(t));
    return ForceField{SpatialFunction(std::move(f)), 0};
  };
  return p;
}

/// A problem instantiated on a grid: data, space and assembled operators.
struct Discretization {
  std::unique_ptr<TwoLevelGrid> grid;
  std::unique_ptr<DGSpace> space;
  AffineParametricScalar lambda;
  DiffusionTensor kappa;
  ForceField force;
  std::unique_ptr<AssembledSystem> sys;

  EstimatorContext estimator(const std::vector<Parameter>& c_eps_sample) const {
    return EstimatorContext::make(*sys, kappa, force, c_eps_sample);
  }
};

inline std::unique_ptr<Discretization> discretize(const Problem& problem, GridDims coarse, GridDims fine_per_coarse,
                                                  int order = 1, const AssemblyOptions& opts = {}) {
  auto d = std::make_unique<Discretization>();
  d->grid = std::make_unique<TwoLevelGrid>(problem.domain, coarse, fine_per_coarse);
  d->space = std::make_unique<DGSpace>(*d->grid, order);
  d->lambda = problem.make_lambda(*d->grid);
  d->lambda.check_positive(*d->grid, problem.parameters);
  d->kappa = problem.make_kappa(*d->grid);
  d->force = problem.make_force(*d->grid);
  d->sys = std::make_unique<AssembledSystem>(assemble(*d->space, d->lambda, d->kappa, d->force, opts));
  return d;
}

/// Default sample for c_eps: parameter box vertices and the training set.
inline std::vector<Parameter> default_c_eps_sample(const ParameterSpace& space) {
  auto s = space.vertices();
  for (const auto& mu : space.training)
    if (std::find(s.begin(), s.end(), mu) == s.end()) s.push_back(mu);
  return s;
}

/// Per coarse element |||p_ref - p_h|||_{mu_ref} where p_ref lives on a nested refinement of p_h's grid
/// (same coarse partition).
inline std::vector<double> energy_error_reference(const Discretization& ref, const Eigen::VectorXd& p_ref,
                                                  const Discretization& coarse, const Eigen::VectorXd& p_h,
                                                  const Parameter& mu_ref) {
  const auto& rg = *ref.grid;
  const auto& cs = *coarse.space;
  if (rg.coarse_dims() != coarse.grid->coarse_dims()) throw InvalidArgument("reference grid must share the coarse partition");
  const auto rule = triangle_rule(2 * ref.space->order() + 2);
  std::vector<double> part(static_cast<std::size_t>(rg.num_triangles()));
  parallel_for(part.size(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const int parent = coarse.grid->locate(rg.centroid(t));
    const auto block = p_ref.segment(ref.space->first_dof(t), ref.space->local_size());
    double s = 0.0;
    for (const auto& q : rule) {
      const Point x = ref.space->to_physical(t, q.position);
      const Point d = ref.space->basis_gradients(t, q.position) * block - cs.gradient(p_h, parent, x);
      s += q.weight * ref.lambda(mu_ref, t, x) * d.dot(ref.kappa(t) * d);
    }
    part[ti] = 2.0 * rg.triangle(t).area * s;
  });
  std::vector<double> out(static_cast<std::size_t>(rg.num_coarse()), 0.0);
  for (int t = 0; t < rg.num_triangles(); ++t) out[static_cast<std::size_t>(rg.triangle(t).coarse)] += part[static_cast<std::size_t>(t)];
  for (auto& v : out) v = std::sqrt(v);
  return out;
}

}  // namespace lrbms
