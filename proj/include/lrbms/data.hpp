#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lrbms/errors.hpp"
#include "lrbms/grid.hpp"
#include "lrbms/quadrature.hpp"

namespace lrbms {

using Parameter = std::vector<double>;

inline std::string to_string(const Parameter& mu) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < mu.size(); ++i) os << (i ? ";" : "") << mu[i];
  return os.str();
}

class ParameterSpace {
public:
  ParameterSpace() = default;
  ParameterSpace(Parameter lower, Parameter upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.empty())
      throw InvalidArgument("ParameterSpace: bound vectors must be nonempty and of equal size");
    for (std::size_t i = 0; i < lower_.size(); ++i)
      if (lower_[i] > upper_[i]) throw InvalidArgument("ParameterSpace: lower bound exceeds upper bound");
  }

  std::size_t dim() const { return lower_.size(); }
  const Parameter& lower() const { return lower_; }
  const Parameter& upper() const { return upper_; }

  bool contains(const Parameter& mu, double tol = 1e-14) const {
    if (mu.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
      if (mu[i] < lower_[i] - tol || mu[i] > upper_[i] + tol) return false;
    return true;
  }

  std::vector<Parameter> vertices() const {
    std::vector<Parameter> out;
    const std::size_t n = std::size_t{1} << dim();
    for (std::size_t mask = 0; mask < n; ++mask) {
      Parameter mu(dim());
      for (std::size_t i = 0; i < dim(); ++i) mu[i] = (mask >> i) & 1 ? upper_[i] : lower_[i];
      if (std::find(out.begin(), out.end(), mu) == out.end()) out.push_back(mu);
    }
    return out;
  }

  // Uniform draws using the top 53 bits of the generator, so results do not
  // depend on the standard library's distribution implementation.
  std::vector<Parameter> sample_uniform(std::size_t count, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<Parameter> out(count, Parameter(dim()));
    for (auto& mu : out)
      for (std::size_t i = 0; i < dim(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        mu[i] = lower_[i] + u * (upper_[i] - lower_[i]);
      }
    return out;
  }

  std::vector<Parameter> training;
  std::vector<Parameter> online;

private:
  Parameter lower_{0.0};
  Parameter upper_{1.0};
};

/// Either a closed-form function of x or one value per fine triangle.
class SpatialFunction {
public:
  using Analytic = std::function<double(const Point&)>;

  SpatialFunction() : f_(Analytic([](const Point&) { return 0.0; })) {}
  SpatialFunction(Analytic f) : f_(std::move(f)) {}
  explicit SpatialFunction(std::vector<double> per_cell) : f_(std::move(per_cell)) {}

  static SpatialFunction constant(double c) {
    return SpatialFunction(Analytic([c](const Point&) { return c; }));
  }

  bool piecewise_constant() const { return std::holds_alternative<std::vector<double>>(f_); }
  const std::vector<double>& cell_values() const { return std::get<std::vector<double>>(f_); }

  double operator()(int t, const Point& x) const {
    if (auto* v = std::get_if<std::vector<double>>(&f_)) return (*v)[static_cast<std::size_t>(t)];
    return std::get<Analytic>(f_)(x);
  }

private:
  std::variant<Analytic, std::vector<double>> f_;
};

/// lambda(x; mu) = sum_xi theta_xi(mu) lambda_xi(x).
class AffineParametricScalar {
public:
  using Coefficient = std::function<double(const Parameter&)>;

  AffineParametricScalar() = default;
  AffineParametricScalar(std::vector<SpatialFunction> components, std::vector<Coefficient> coefficients)
      : components_(std::move(components)), coefficients_(std::move(coefficients)) {
    if (components_.empty() || components_.size() != coefficients_.size())
      throw InvalidArgument("AffineParametricScalar: need matching, nonempty component/coefficient lists");
  }

  static AffineParametricScalar constant(double c) {
    return AffineParametricScalar({SpatialFunction::constant(c)}, {[](const Parameter&) { return 1.0; }});
  }

  std::size_t size() const { return components_.size(); }
  const SpatialFunction& component(std::size_t xi) const { return components_[xi]; }
  double theta(std::size_t xi, const Parameter& mu) const { return coefficients_[xi](mu); }
  std::vector<double> thetas(const Parameter& mu) const {
    std::vector<double> th(size());
    for (std::size_t xi = 0; xi < size(); ++xi) th[xi] = theta(xi, mu);
    return th;
  }
  bool piecewise_constant() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const SpatialFunction& c) { return c.piecewise_constant(); });
  }

  double component_value(std::size_t xi, int t, const Point& x) const { return components_[xi](t, x); }

  double operator()(const Parameter& mu, int t, const Point& x) const {
    double v = 0.0;
    for (std::size_t xi = 0; xi < size(); ++xi) v += theta(xi, mu) * components_[xi](t, x);
    return v;
  }

  /// Throws if lambda is not strictly positive at every evaluation point for every box vertex.
  void check_positive(const TwoLevelGrid& grid, const ParameterSpace& space) const;

private:
  std::vector<SpatialFunction> components_;
  std::vector<Coefficient> coefficients_;
};

/// Points at which cellwise bounds of lambda are taken: one point for
/// piecewise-constant data, otherwise vertices, centroid and quadrature points.
inline std::vector<Point> evaluation_points(const TwoLevelGrid& grid, int t, bool piecewise_constant) {
  const auto& tri = grid.triangle(t);
  const Point& a = grid.vertex(tri.vertices[0]);
  const Point& b = grid.vertex(tri.vertices[1]);
  const Point& c = grid.vertex(tri.vertices[2]);
  if (piecewise_constant) return {(a + b + c) / 3.0};
  std::vector<Point> pts{a, b, c, (a + b + c) / 3.0};
  static const auto rule = triangle_rule(4);
  for (const auto& q : rule) pts.push_back(a + q.position.x() * (b - a) + q.position.y() * (c - a));
  return pts;
}

inline void AffineParametricScalar::check_positive(const TwoLevelGrid& grid, const ParameterSpace& space) const {
  const auto corners = space.vertices();
  for (int t = 0; t < grid.num_triangles(); ++t)
    for (const auto& x : evaluation_points(grid, t, piecewise_constant()))
      for (const auto& mu : corners)
        if (!((*this)(mu, t, x) > 0.0))
          throw DomainError("lambda is not positive on triangle " + std::to_string(t) + " at mu = " +
                            to_string(mu));
}

/// Piecewise-constant symmetric positive definite tensor, one per fine triangle.
class DiffusionTensor {
public:
  DiffusionTensor() = default;
  explicit DiffusionTensor(std::vector<Eigen::Matrix2d> cells) : cells_(std::move(cells)) {
    min_eig_.resize(cells_.size());
    max_eig_.resize(cells_.size());
    for (std::size_t t = 0; t < cells_.size(); ++t) {
      const auto& K = cells_[t];
      if (std::abs(K(0, 1) - K(1, 0)) > 1e-14 * K.cwiseAbs().maxCoeff())
        throw DomainError("diffusion tensor is not symmetric on triangle " + std::to_string(t));
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(K);
      min_eig_[t] = es.eigenvalues()(0);
      max_eig_[t] = es.eigenvalues()(1);
      if (!(min_eig_[t] > 0.0))
        throw DomainError("diffusion tensor is not positive definite on triangle " + std::to_string(t));
    }
  }

  static DiffusionTensor isotropic(const std::vector<double>& values) {
    std::vector<Eigen::Matrix2d> cells(values.size());
    for (std::size_t t = 0; t < values.size(); ++t) cells[t] = values[t] * Eigen::Matrix2d::Identity();
    return DiffusionTensor(std::move(cells));
  }
  static DiffusionTensor uniform(const TwoLevelGrid& grid, const Eigen::Matrix2d& K) {
    return DiffusionTensor(std::vector<Eigen::Matrix2d>(static_cast<std::size_t>(grid.num_triangles()), K));
  }

  std::size_t size() const { return cells_.size(); }
  const Eigen::Matrix2d& operator()(int t) const { return cells_[static_cast<std::size_t>(t)]; }
  double min_eigenvalue(int t) const { return min_eig_[static_cast<std::size_t>(t)]; }
  double max_eigenvalue(int t) const { return max_eig_[static_cast<std::size_t>(t)]; }
  double normal_diffusion(int t, const Point& n) const { return n.dot((*this)(t) * n); }

private:
  std::vector<Eigen::Matrix2d> cells_;
  std::vector<double> min_eig_, max_eig_;
};

struct ForceField {
  SpatialFunction f;
  int order_hint = 0;  // extra quadrature order for analytic f
};

struct EquivalenceConstants {
  double alpha = 1.0;
  double gamma = 1.0;
};

/// Tightest cellwise alpha, gamma with alpha lambda(mu_ref) <= lambda(mu) <= gamma lambda(mu_ref).
inline EquivalenceConstants equivalence_constants(const AffineParametricScalar& lambda, const Parameter& mu,
                                                  const Parameter& mu_ref, const TwoLevelGrid& grid) {
  if (mu == mu_ref) return {1.0, 1.0};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const bool pc = lambda.piecewise_constant();
  for (int t = 0; t < grid.num_triangles(); ++t) {
    for (const auto& x : evaluation_points(grid, t, pc)) {
      const double a = lambda(mu, t, x), b = lambda(mu_ref, t, x);
      if (!(a > 0.0) || !(b > 0.0))
        throw DomainError("lambda is not positive on triangle " + std::to_string(t));
      lo = std::min(lo, a / b);
      hi = std::max(hi, a / b);
    }
  }
  return {lo, hi};
}

/// min/max_xi theta_xi(mu)/theta_xi(mu_ref); requires theta_xi > 0 and lambda_xi >= 0.
inline EquivalenceConstants theta_ratio_constants(const AffineParametricScalar& lambda, const Parameter& mu,
                                                  const Parameter& mu_ref) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t xi = 0; xi < lambda.size(); ++xi) {
    const double a = lambda.theta(xi, mu), b = lambda.theta(xi, mu_ref);
    if (!(a > 0.0) || !(b > 0.0))
      throw DomainError("theta ratio bounds need strictly positive coefficients");
    lo = std::min(lo, a / b);
    hi = std::max(hi, a / b);
  }
  return {lo, hi};
}

/// min over the sample and the fine cells of T of the smallest eigenvalue of lambda(mu) kappa.
inline double min_eigenvalue_over_parameters(const AffineParametricScalar& lambda, const DiffusionTensor& kappa,
                                             const TwoLevelGrid& grid, const std::vector<Parameter>& sample,
                                             int T) {
  if (sample.empty()) throw InvalidArgument("min_eigenvalue_over_parameters: empty parameter sample");
  const int first = grid.first_triangle(T), count = grid.triangles_per_coarse();
  const bool pc = lambda.piecewise_constant();
  double c = std::numeric_limits<double>::infinity();
  for (int t = first; t < first + count; ++t)
    for (const auto& x : evaluation_points(grid, t, pc))
      for (const auto& mu : sample) c = std::min(c, lambda(mu, t, x) * kappa.min_eigenvalue(t));
  if (!(c > 0.0)) throw DomainError("lambda kappa is not positive definite on coarse element " + std::to_string(T));
  return c;
}

/// Cell values of a (cols x rows) file layout, row-major from the bottom-left cell.
inline std::vector<double> read_cell_values(const std::string& path, int cols, int rows) {
  if (cols < 1 || rows < 1) throw InvalidArgument("permeability layout must be at least 1 x 1");
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open permeability file '" + path + "'");
  const std::size_t expected = static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows);
  std::vector<double> values;
  values.reserve(expected);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      double v = 0.0;
      const auto* end = tok.data() + tok.size();
      const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
      if (ec != std::errc() || ptr != end)
        throw ParseError("permeability file: non-numeric token '" + tok + "'", line_no);
      if (!std::isfinite(v) || v <= 0.0)
        throw ParseError("permeability file: nonpositive value " + tok, line_no);
      if (values.size() == expected)
        throw ParseError("permeability file: more than the expected " + std::to_string(expected) + " values",
                         line_no);
      values.push_back(v);
    }
  }
  if (values.size() < expected)
    throw ParseError("permeability file: expected " + std::to_string(expected) + " values for a " +
                         std::to_string(cols) + "x" + std::to_string(rows) + " layout, found " +
                         std::to_string(values.size()) + " (short by " +
                         std::to_string(expected - values.size()) + ")",
                     line_no);
  return values;
}

/// Maps a cols x rows cell layout over the domain onto fine triangles by centroid lookup.
inline std::vector<double> map_cells_to_triangles(const std::vector<double>& values, const TwoLevelGrid& grid,
                                                  int cols, int rows) {
  const auto& d = grid.domain();
  std::vector<double> out(static_cast<std::size_t>(grid.num_triangles()));
  for (int t = 0; t < grid.num_triangles(); ++t) {
    const Point c = grid.centroid(t);
    const int i = std::clamp(static_cast<int>((c.x() - d.x0) / d.width() * cols), 0, cols - 1);
    const int j = std::clamp(static_cast<int>((c.y() - d.y0) / d.height() * rows), 0, rows - 1);
    out[static_cast<std::size_t>(t)] = values[static_cast<std::size_t>(j * cols + i)];
  }
  return out;
}

inline DiffusionTensor ingest_permeability(const std::string& path, const TwoLevelGrid& grid, int cols, int rows) {
  return DiffusionTensor::isotropic(map_cells_to_triangles(read_cell_values(path, cols, rows), grid, cols, rows));
}

}  // namespace lrbms
