#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrbms/errors.hpp"

namespace lrbms {

struct QuadraturePoint1D {
  double position;  // in [0, 1]
  double weight;    // sums to 1
};

struct QuadraturePoint2D {
  Eigen::Vector2d position;  // reference triangle (0,0), (1,0), (0,1)
  double weight;             // sums to 1/2
};

namespace detail {
// Legendre polynomial P_n and its derivative at x.
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  if (n == 0) return {1.0, 0.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}
}  // namespace detail

/// Gauss-Legendre rule with `n` points mapped to [0, 1].
inline std::vector<QuadraturePoint1D> gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one point");
  if (n == 1) return {{0.5, 1.0}};
  std::vector<QuadraturePoint1D> rule(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre(n, x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    rule[static_cast<std::size_t>(i)] = {0.5 * (1.0 - x), w};
    rule[static_cast<std::size_t>(n - 1 - i)] = {0.5 * (1.0 + x), w};
  }
  return rule;
}

/// Rule on [0, 1] exact for polynomials of degree `order`.
inline std::vector<QuadraturePoint1D> line_rule(int order) {
  return gauss_legendre(std::max(1, (order + 2) / 2));
}

/// Collapsed (Duffy) tensor rule on the reference triangle, exact for total degree `order`.
inline std::vector<QuadraturePoint2D> triangle_rule(int order) {
  const int n = std::max(1, (order + 3) / 2);
  const auto g = gauss_legendre(n);
  std::vector<QuadraturePoint2D> rule;
  rule.reserve(g.size() * g.size());
  for (const auto& a : g) {
    for (const auto& b : g) {
      // (u, v) in unit square -> (u (1 - v), v)
      const double xi = a.position * (1.0 - b.position);
      const double eta = b.position;
      rule.push_back({Eigen::Vector2d(xi, eta), a.weight * b.weight * (1.0 - b.position)});
    }
  }
  return rule;
}

}  // namespace lrbms
