#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace parax::grid {

/// Transverse faces of the rectangular section, counterclockwise from y = y0.
enum class Side { bottom = 0, right = 1, top = 2, left = 3 };
inline constexpr std::array<Side, 4> all_sides{Side::bottom, Side::right, Side::top, Side::left};

struct BoundaryNode {
  int i = 0, j = 0;
  std::array<double, 2> normal{};   ///< unit outward normal
  std::array<double, 2> tangent{};  ///< (-normal_y, normal_x)
};

/// Node-collocated tensor grid over [x0, x0+a] x [y0, y0+b] x [0, Z].
/// A planar mesh has nz == 1 and Z == 0.
struct Mesh {
  double a = 1.0, b = 1.0, zlen = 0.0;
  double x0 = 0.0, y0 = 0.0;
  int nx = 3, ny = 3, nz = 1;
  double hx = 0.5, hy = 0.5, hz = 0.0;
  /// Gamma nodes of one transverse plane, counterclockwise; corners carry the
  /// normalized diagonal normal.
  std::vector<BoundaryNode> boundary;

  std::size_t plane_size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t size() const { return plane_size() * nz; }
  std::size_t index(int i, int j, int k = 0) const {
    return (static_cast<std::size_t>(k) * ny + j) * nx + i;
  }
  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return y0 + j * hy; }
  double zeta(int k) const { return k * hz; }
  bool planar() const { return nz == 1; }
  double area() const { return a * b; }

  /// Number of nodes along a side and the node (i, j) of its s-th entry, in
  /// increasing coordinate order.
  int side_count(Side s) const { return (s == Side::bottom || s == Side::top) ? nx : ny; }
  std::array<int, 2> side_node(Side s, int n) const;
  std::array<double, 2> side_normal(Side s) const;
  double side_spacing(Side s) const { return (s == Side::bottom || s == Side::top) ? hx : hy; }

  /// Same geometry and resolution (boundary table is derived).
  bool same_grid(const Mesh& o) const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Volume mesh; counts >= 3 per axis, extents > 0.
MeshPtr build_mesh(double a, double b, double zlen, int nx, int ny, int nz, double x0 = 0.0,
                   double y0 = 0.0);
/// Transverse-only mesh for per-slice work.
MeshPtr build_plane_mesh(double a, double b, int nx, int ny, double x0 = 0.0, double y0 = 0.0);
/// The transverse plane of a volume mesh.
MeshPtr plane_of(const Mesh& m);

}  // namespace parax::grid
