#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "lrbms/data.hpp"
#include "lrbms/dg_space.hpp"
#include "lrbms/parallel.hpp"
#include "lrbms/quadrature.hpp"
#include "lrbms/reconstruct.hpp"
#include "lrbms/swipdg.hpp"

namespace lrbms {

// Payne-Weinberger constant for convex elements.
inline constexpr double kConvexPoincare = 1.0 / (std::numbers::pi * std::numbers::pi);

/// Everything the estimator needs besides the solution and the parameters.
struct EstimatorContext {
  const AssembledSystem* sys = nullptr;
  const DiffusionTensor* kappa = nullptr;
  const ForceField* force = nullptr;
  std::vector<double> c_eps;  // per coarse element
  double poincare = kConvexPoincare;

  static EstimatorContext make(const AssembledSystem& sys, const DiffusionTensor& kappa, const ForceField& force,
                               const std::vector<Parameter>& c_eps_sample) {
    EstimatorContext ctx;
    ctx.sys = &sys;
    ctx.kappa = &kappa;
    ctx.force = &force;
    const auto& grid = sys.space->grid();
    ctx.c_eps.resize(static_cast<std::size_t>(grid.num_coarse()));
    parallel_for(ctx.c_eps.size(), [&](std::size_t T) {
      ctx.c_eps[T] = min_eigenvalue_over_parameters(sys.lambda, kappa, grid, c_eps_sample, static_cast<int>(T));
    });
    return ctx;
  }
};

/// |||p - I_os p|||_{mu_ref, T} per coarse element.
inline std::vector<double> eta_nc(const AssembledSystem& sys, const Eigen::VectorXd& p, const Parameter& mu_ref) {
  const Eigen::VectorXd d = p - oswald_interpolate(*sys.space, p);
  return local_energy_norms(sys, d, mu_ref);
}

inline std::vector<double> eta_r(const EstimatorContext& ctx, const FluxField& flux) {
  const DGSpace& space = *ctx.sys->space;
  const auto& grid = space.grid();
  const auto& f = ctx.force->f;
  const auto rule = triangle_rule(2 * space.order() + 2 + ctx.force->order_hint);
  std::vector<double> out(static_cast<std::size_t>(grid.num_coarse()));
  parallel_for(out.size(), [&](std::size_t Ti) {
    const int T = static_cast<int>(Ti);
    double s = 0.0;
    for (int t = grid.first_triangle(T); t < grid.first_triangle(T) + grid.triangles_per_coarse(); ++t) {
      const double div = flux.divergence(t), area = grid.triangle(t).area;
      if (f.piecewise_constant()) {
        const double r = f(t, Point::Zero()) - div;
        s += area * r * r;
      } else {
        for (const auto& q : rule) {
          const double r = f(t, space.to_physical(t, q.position)) - div;
          s += 2.0 * area * q.weight * r * r;
        }
      }
    }
    out[Ti] = std::sqrt(ctx.poincare / ctx.c_eps[Ti]) * grid.coarse_diameter(T) * std::sqrt(s);
  });
  return out;
}

/// ||(lambda(mu_hat) kappa)^{-1/2} (lambda(mu) kappa grad p + R)||_T per coarse element.
inline std::vector<double> eta_df(const EstimatorContext& ctx, const Eigen::VectorXd& p, const FluxField& flux,
                                  const Parameter& mu, const Parameter& mu_hat) {
  const AssembledSystem& sys = *ctx.sys;
  const DGSpace& space = *sys.space;
  const auto& grid = space.grid();
  const bool analytic = !sys.lambda.piecewise_constant();
  const auto rule = triangle_rule(2 * space.order() + 1 + (analytic ? 2 : 0));
  std::vector<double> out(static_cast<std::size_t>(grid.num_coarse()));
  parallel_for(out.size(), [&](std::size_t Ti) {
    const int T = static_cast<int>(Ti);
    double s = 0.0;
    for (int t = grid.first_triangle(T); t < grid.first_triangle(T) + grid.triangles_per_coarse(); ++t) {
      const Eigen::Matrix2d& K = (*ctx.kappa)(t);
      const Eigen::Matrix2d Kinv = K.inverse();
      const auto block = p.segment(space.first_dof(t), space.local_size());
      const double area = grid.triangle(t).area;
      for (const auto& q : rule) {
        const Point x = space.to_physical(t, q.position);
        const Point w = sys.lambda(mu, t, x) * (K * (space.basis_gradients(t, q.position) * block)) + flux.value(t, x);
        s += 2.0 * area * q.weight * w.dot(Kinv * w) / sys.lambda(mu_hat, t, x);
      }
    }
    out[Ti] = std::sqrt(s);
  });
  return out;
}

enum class IndicatorVariant {
  published,       // (3/sqrt(a)) [sqrt(g) nc^2 + r^2 + df^2 / sqrt(a_hat)]
  bound_preserving // (3/a) [g nc^2 + r^2 + df^2 / a_hat], always >= the global bound squared
};

struct EstimatorReport {
  std::vector<double> nc, r, df, indicators;
  double alpha_bar = 1.0, gamma_bar = 1.0, alpha_hat = 1.0;
  double eta = 0.0;
  Parameter mu, mu_bar, mu_hat;
  double poincare = kConvexPoincare;

  static double l2(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  }
  double total_nc() const { return l2(nc); }
  double total_r() const { return l2(r); }
  double total_df() const { return l2(df); }
  double indicator_sum_squares() const {
    return std::inner_product(indicators.begin(), indicators.end(), indicators.begin(), 0.0);
  }
};

inline double eta_total(const std::vector<double>& nc, const std::vector<double>& r, const std::vector<double>& df,
                        double alpha_bar, double gamma_bar, double alpha_hat) {
  if (nc.size() != r.size() || r.size() != df.size())
    throw InvalidArgument("eta_total: component vectors differ in length");
  return (std::sqrt(gamma_bar) * EstimatorReport::l2(nc) + EstimatorReport::l2(r) +
          EstimatorReport::l2(df) / std::sqrt(alpha_hat)) /
         std::sqrt(alpha_bar);
}

inline std::vector<double> local_indicators(const std::vector<double>& nc, const std::vector<double>& r,
                                            const std::vector<double>& df, double alpha_bar, double gamma_bar,
                                            double alpha_hat,
                                            IndicatorVariant variant = IndicatorVariant::published) {
  std::vector<double> out(nc.size());
  for (std::size_t T = 0; T < nc.size(); ++T) {
    const double a = nc[T] * nc[T], b = r[T] * r[T], c = df[T] * df[T];
    const double sq = variant == IndicatorVariant::published
                          ? 3.0 / std::sqrt(alpha_bar) * (std::sqrt(gamma_bar) * a + b + c / std::sqrt(alpha_hat))
                          : 3.0 / alpha_bar * (gamma_bar * a + b + c / alpha_hat);
    out[T] = std::sqrt(sq);
  }
  return out;
}

inline EstimatorReport estimate(const EstimatorContext& ctx, const Eigen::VectorXd& p, const Parameter& mu,
                                const Parameter& mu_bar, const Parameter& mu_hat,
                                IndicatorVariant variant = IndicatorVariant::published) {
  const AssembledSystem& sys = *ctx.sys;
  const auto& grid = sys.space->grid();
  EstimatorReport rep;
  rep.mu = mu;
  rep.mu_bar = mu_bar;
  rep.mu_hat = mu_hat;
  rep.poincare = ctx.poincare;
  const FluxField flux = reconstruct_flux(sys, *ctx.kappa, p, mu);
  rep.nc = eta_nc(sys, p, mu_bar);
  rep.r = eta_r(ctx, flux);
  rep.df = eta_df(ctx, p, flux, mu, mu_hat);
  const auto eb = equivalence_constants(sys.lambda, mu, mu_bar, grid);
  rep.alpha_bar = eb.alpha;
  rep.gamma_bar = eb.gamma;
  rep.alpha_hat = equivalence_constants(sys.lambda, mu, mu_hat, grid).alpha;
  rep.eta = eta_total(rep.nc, rep.r, rep.df, rep.alpha_bar, rep.gamma_bar, rep.alpha_hat);
  rep.indicators = local_indicators(rep.nc, rep.r, rep.df, rep.alpha_bar, rep.gamma_bar, rep.alpha_hat, variant);
  return rep;
}

/// |||p - p_h|||_{mu_ref} for a closed-form gradient of p, by high-order quadrature.
template <class Grad>
double energy_error_exact(const AssembledSystem& sys, const DiffusionTensor& kappa, const Eigen::VectorXd& ph,
                          Grad&& grad_exact, const Parameter& mu_ref, int order = 10) {
  const DGSpace& space = *sys.space;
  const auto& grid = space.grid();
  const auto rule = triangle_rule(order);
  std::vector<double> part(static_cast<std::size_t>(grid.num_triangles()));
  parallel_for(part.size(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const auto block = ph.segment(space.first_dof(t), space.local_size());
    double s = 0.0;
    for (const auto& q : rule) {
      const Point x = space.to_physical(t, q.position);
      const Point d = Point(grad_exact(x)) - space.basis_gradients(t, q.position) * block;
      s += q.weight * sys.lambda(mu_ref, t, x) * d.dot(kappa(t) * d);
    }
    part[ti] = 2.0 * grid.triangle(t).area * s;
  });
  return std::sqrt(std::accumulate(part.begin(), part.end(), 0.0));
}

}  // namespace lrbms
