#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "lrbms/errors.hpp"

namespace lrbms {

using Point = Eigen::Vector2d;

struct Rectangle {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double diameter() const { return std::hypot(width(), height()); }
  bool contains(const Point& p, double tol = 0.0) const {
    return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
  }
};

struct GridDims {
  int nx = 1, ny = 1;
  int count() const { return nx * ny; }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

inline constexpr int kNone = -1;

struct FineTriangle {
  std::array<int, 3> vertices;  // counter-clockwise
  std::array<int, 3> faces;     // faces[i] is opposite vertices[i]
  int coarse = kNone;
  double area = 0.0;
};

struct FineFace {
  std::array<int, 2> vertices;
  Point normal;  // unit; from minus to plus, outward on the boundary
  double length = 0.0;
  bool boundary = false;
  int minus = kNone;
  int plus = kNone;         // kNone on boundary faces
  int coarse_face = kNone;  // kNone if interior to a coarse element or on the domain boundary
};

struct CoarseFace {
  std::array<int, 2> elements;  // elements[0] < elements[1]
  std::vector<int> fine_faces;
  double length = 0.0;
};

/// Rectangular coarse partition nested over a structured criss triangulation.
///
/// Triangles are numbered coarse element by coarse element (row-major), then
/// by fine square (row-major) inside the element, lower-right triangle first,
/// so the fine cells of every coarse element form a contiguous id range.
class TwoLevelGrid {
public:
  TwoLevelGrid(Rectangle domain, GridDims coarse, GridDims fine_per_coarse)
      : domain_(domain), coarse_(coarse), fine_(fine_per_coarse) {
    if (coarse.nx < 1 || coarse.ny < 1 || fine_per_coarse.nx < 1 || fine_per_coarse.ny < 1)
      throw InvalidArgument("build_two_level_grid: all element counts must be >= 1");
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
      throw InvalidArgument("build_two_level_grid: degenerate domain");
    build();
  }

  const Rectangle& domain() const { return domain_; }
  GridDims coarse_dims() const { return coarse_; }
  GridDims fine_per_coarse() const { return fine_; }
  GridDims fine_dims() const { return {coarse_.nx * fine_.nx, coarse_.ny * fine_.ny}; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_coarse() const { return coarse_.count(); }
  int num_coarse_faces() const { return static_cast<int>(coarse_faces_.size()); }
  int triangles_per_coarse() const { return 2 * fine_.count(); }

  const Point& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const FineTriangle& triangle(int t) const { return triangles_[static_cast<std::size_t>(t)]; }
  const std::vector<FineTriangle>& triangles() const { return triangles_; }
  const FineFace& face(int e) const { return faces_[static_cast<std::size_t>(e)]; }
  const std::vector<FineFace>& faces() const { return faces_; }
  const CoarseFace& coarse_face(int E) const { return coarse_faces_[static_cast<std::size_t>(E)]; }
  const std::vector<CoarseFace>& coarse_faces() const { return coarse_faces_; }

  /// Face neighbors N(T), sorted ascending.
  const std::vector<int>& coarse_neighbors(int T) const {
    check_coarse(T);
    return coarse_neighbors_[static_cast<std::size_t>(T)];
  }
  /// Ids of the coarse faces on the boundary of T.
  const std::vector<int>& coarse_faces_of(int T) const {
    check_coarse(T);
    return coarse_faces_of_[static_cast<std::size_t>(T)];
  }

  int first_triangle(int T) const { return T * triangles_per_coarse(); }

  Rectangle coarse_rectangle(int T) const {
    check_coarse(T);
    const int cx = T % coarse_.nx, cy = T / coarse_.nx;
    const double hx = domain_.width() / coarse_.nx, hy = domain_.height() / coarse_.ny;
    return {domain_.x0 + cx * hx, domain_.y0 + cy * hy, domain_.x0 + (cx + 1) * hx,
            domain_.y0 + (cy + 1) * hy};
  }
  double coarse_diameter(int T) const { return coarse_rectangle(T).diameter(); }

  Point centroid(int t) const {
    const auto& tri = triangle(t);
    return (vertex(tri.vertices[0]) + vertex(tri.vertices[1]) + vertex(tri.vertices[2])) / 3.0;
  }
  double diameter(int t) const {
    const auto& tri = triangle(t);
    double d = 0.0;
    for (int e : tri.faces) d = std::max(d, face(e).length);
    return d;
  }

  /// Sign of the face normal seen from t: +1 if it points out of t.
  int orientation(int t, int e) const { return face(e).minus == t ? 1 : -1; }

  /// The triangle containing p (points on shared edges resolve deterministically).
  int locate(const Point& p) const {
    const auto fd = fine_dims();
    const double hx = domain_.width() / fd.nx, hy = domain_.height() / fd.ny;
    const double sx = (p.x() - domain_.x0) / hx, sy = (p.y() - domain_.y0) / hy;
    const int ix = std::clamp(static_cast<int>(std::floor(sx)), 0, fd.nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(sy)), 0, fd.ny - 1);
    const bool lower = (sx - ix) >= (sy - iy);
    return square_triangle(ix, iy, lower ? 0 : 1);
  }

  /// Coarse ids touching T (faces or corners), including T itself; sorted.
  std::vector<int> oversampling_patch(int T) const {
    check_coarse(T);
    const int cx = T % coarse_.nx, cy = T / coarse_.nx;
    std::vector<int> patch;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = cx + dx, y = cy + dy;
        if (x >= 0 && x < coarse_.nx && y >= 0 && y < coarse_.ny) patch.push_back(y * coarse_.nx + x);
      }
    }
    std::sort(patch.begin(), patch.end());
    return patch;
  }

  /// Stable 64-bit fingerprint of the construction inputs.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, std::size_t n) {
      const auto* bytes = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
      }
    };
    const double box[4] = {domain_.x0, domain_.y0, domain_.x1, domain_.y1};
    const int dims[4] = {coarse_.nx, coarse_.ny, fine_.nx, fine_.ny};
    mix(box, sizeof(box));
    mix(dims, sizeof(dims));
    return h;
  }

private:
  void check_coarse(int T) const {
    if (T < 0 || T >= num_coarse())
      throw InvalidArgument("coarse element id " + std::to_string(T) + " out of range");
  }

  int vertex_id(int ix, int iy) const { return iy * (fine_dims().nx + 1) + ix; }

  // Triangle id of local triangle `local` (0: lower-right, 1: upper-left) in global fine square (ix, iy).
  int square_triangle(int ix, int iy, int local) const {
    const int cx = ix / fine_.nx, lx = ix % fine_.nx;
    const int cy = iy / fine_.ny, ly = iy % fine_.ny;
    const int T = cy * coarse_.nx + cx;
    return T * triangles_per_coarse() + 2 * (ly * fine_.nx + lx) + local;
  }

  void build() {
    const auto fd = fine_dims();
    const double hx = domain_.width() / fd.nx, hy = domain_.height() / fd.ny;
    vertices_.reserve(static_cast<std::size_t>((fd.nx + 1) * (fd.ny + 1)));
    for (int iy = 0; iy <= fd.ny; ++iy)
      for (int ix = 0; ix <= fd.nx; ++ix)
        vertices_.emplace_back(ix == fd.nx ? domain_.x1 : domain_.x0 + ix * hx,
                               iy == fd.ny ? domain_.y1 : domain_.y0 + iy * hy);

    triangles_.resize(static_cast<std::size_t>(2 * fd.count()));
    for (int cy = 0; cy < coarse_.ny; ++cy) {
      for (int cx = 0; cx < coarse_.nx; ++cx) {
        const int T = cy * coarse_.nx + cx;
        for (int ly = 0; ly < fine_.ny; ++ly) {
          for (int lx = 0; lx < fine_.nx; ++lx) {
            const int ix = cx * fine_.nx + lx, iy = cy * fine_.ny + ly;
            const int sw = vertex_id(ix, iy), se = vertex_id(ix + 1, iy);
            const int ne = vertex_id(ix + 1, iy + 1), nw = vertex_id(ix, iy + 1);
            auto& lower = triangles_[static_cast<std::size_t>(square_triangle(ix, iy, 0))];
            auto& upper = triangles_[static_cast<std::size_t>(square_triangle(ix, iy, 1))];
            lower.vertices = {sw, se, ne};
            upper.vertices = {sw, ne, nw};
            lower.coarse = upper.coarse = T;
          }
        }
      }
    }

    std::unordered_map<std::uint64_t, int> edge_ids;
    edge_ids.reserve(triangles_.size() * 2);
    for (int t = 0; t < num_triangles(); ++t) {
      auto& tri = triangles_[static_cast<std::size_t>(t)];
      const Point& a = vertex(tri.vertices[0]);
      const Point& b = vertex(tri.vertices[1]);
      const Point& c = vertex(tri.vertices[2]);
      tri.area = 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
      for (int i = 0; i < 3; ++i) {
        const int va = tri.vertices[static_cast<std::size_t>((i + 1) % 3)];
        const int vb = tri.vertices[static_cast<std::size_t>((i + 2) % 3)];
        const auto key = (static_cast<std::uint64_t>(std::min(va, vb)) << 32) |
                         static_cast<std::uint64_t>(std::max(va, vb));
        auto [it, inserted] = edge_ids.try_emplace(key, num_faces());
        if (inserted) {
          FineFace f;
          f.vertices = {va, vb};
          const Point d = vertex(vb) - vertex(va);
          f.length = d.norm();
          f.normal = Point(d.y(), -d.x()) / f.length;  // outward for a ccw triangle
          f.minus = t;
          faces_.push_back(f);
        } else {
          faces_[static_cast<std::size_t>(it->second)].plus = t;
        }
        tri.faces[static_cast<std::size_t>(i)] = it->second;
      }
    }

    coarse_neighbors_.assign(static_cast<std::size_t>(num_coarse()), {});
    coarse_faces_of_.assign(static_cast<std::size_t>(num_coarse()), {});
    std::unordered_map<std::uint64_t, int> coarse_ids;
    for (int e = 0; e < num_faces(); ++e) {
      auto& f = faces_[static_cast<std::size_t>(e)];
      f.boundary = f.plus == kNone;
      if (f.boundary) continue;
      const int Tm = triangle(f.minus).coarse, Tp = triangle(f.plus).coarse;
      if (Tm == Tp) continue;
      const auto key = (static_cast<std::uint64_t>(std::min(Tm, Tp)) << 32) |
                       static_cast<std::uint64_t>(std::max(Tm, Tp));
      auto [it, inserted] = coarse_ids.try_emplace(key, num_coarse_faces());
      if (inserted) {
        coarse_faces_.push_back({{std::min(Tm, Tp), std::max(Tm, Tp)}, {}, 0.0});
        coarse_neighbors_[static_cast<std::size_t>(Tm)].push_back(Tp);
        coarse_neighbors_[static_cast<std::size_t>(Tp)].push_back(Tm);
        coarse_faces_of_[static_cast<std::size_t>(Tm)].push_back(it->second);
        coarse_faces_of_[static_cast<std::size_t>(Tp)].push_back(it->second);
      }
      auto& E = coarse_faces_[static_cast<std::size_t>(it->second)];
      E.fine_faces.push_back(e);
      E.length += f.length;
      f.coarse_face = it->second;
    }
    for (auto& n : coarse_neighbors_) std::sort(n.begin(), n.end());
    for (auto& n : coarse_faces_of_) std::sort(n.begin(), n.end());
  }

  Rectangle domain_;
  GridDims coarse_;
  GridDims fine_;
  std::vector<Point> vertices_;
  std::vector<FineTriangle> triangles_;
  std::vector<FineFace> faces_;
  std::vector<CoarseFace> coarse_faces_;
  std::vector<std::vector<int>> coarse_neighbors_;
  std::vector<std::vector<int>> coarse_faces_of_;
};

inline TwoLevelGrid build_two_level_grid(Rectangle domain, GridDims coarse, GridDims fine_per_coarse) {
  return TwoLevelGrid(domain, coarse, fine_per_coarse);
}

}  // namespace lrbms
