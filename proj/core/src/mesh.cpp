#include "parax/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace parax::grid {

namespace {

void build_boundary(Mesh& m) {
  m.boundary.clear();
  const double r = 1.0 / std::sqrt(2.0);
  auto push = [&](int i, int j) {
    const bool lo_x = i == 0, hi_x = i == m.nx - 1, lo_y = j == 0, hi_y = j == m.ny - 1;
    double nx = (hi_x ? 1.0 : 0.0) - (lo_x ? 1.0 : 0.0);
    double ny = (hi_y ? 1.0 : 0.0) - (lo_y ? 1.0 : 0.0);
    if (nx != 0.0 && ny != 0.0) {
      nx *= r;
      ny *= r;
    }
    m.boundary.push_back({i, j, {nx, ny}, {-ny, nx}});
  };
  for (int i = 0; i < m.nx; ++i) push(i, 0);
  for (int j = 1; j < m.ny; ++j) push(m.nx - 1, j);
  for (int i = m.nx - 2; i >= 0; --i) push(i, m.ny - 1);
  for (int j = m.ny - 2; j >= 1; --j) push(0, j);
}

void check_axis(const char* name, double extent, int count) {
  if (!(extent > 0.0) || !std::isfinite(extent))
    throw std::invalid_argument(std::string("mesh extent ") + name + " must be positive");
  if (count < 3)
    throw std::invalid_argument(std::string("mesh count n") + name + " must be at least 3");
}

}  // namespace

std::array<int, 2> Mesh::side_node(Side s, int n) const {
  switch (s) {
    case Side::bottom: return {n, 0};
    case Side::right: return {nx - 1, n};
    case Side::top: return {n, ny - 1};
    case Side::left: return {0, n};
  }
  return {0, 0};
}

std::array<double, 2> Mesh::side_normal(Side s) const {
  switch (s) {
    case Side::bottom: return {0.0, -1.0};
    case Side::right: return {1.0, 0.0};
    case Side::top: return {0.0, 1.0};
    case Side::left: return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

bool Mesh::same_grid(const Mesh& o) const {
  return nx == o.nx && ny == o.ny && nz == o.nz && a == o.a && b == o.b && zlen == o.zlen &&
         x0 == o.x0 && y0 == o.y0;
}

MeshPtr build_mesh(double a, double b, double zlen, int nx, int ny, int nz, double x0,
                   double y0) {
  check_axis("x", a, nx);
  check_axis("y", b, ny);
  check_axis("zeta", zlen, nz);
  auto m = std::make_shared<Mesh>();
  m->a = a;
  m->b = b;
  m->zlen = zlen;
  m->x0 = x0;
  m->y0 = y0;
  m->nx = nx;
  m->ny = ny;
  m->nz = nz;
  m->hx = a / (nx - 1);
  m->hy = b / (ny - 1);
  m->hz = zlen / (nz - 1);
  build_boundary(*m);
  return m;
}

MeshPtr build_plane_mesh(double a, double b, int nx, int ny, double x0, double y0) {
  check_axis("x", a, nx);
  check_axis("y", b, ny);
  auto m = std::make_shared<Mesh>();
  m->a = a;
  m->b = b;
  m->x0 = x0;
  m->y0 = y0;
  m->nx = nx;
  m->ny = ny;
  m->nz = 1;
  m->zlen = 0.0;
  m->hx = a / (nx - 1);
  m->hy = b / (ny - 1);
  m->hz = 0.0;
  build_boundary(*m);
  return m;
}

MeshPtr plane_of(const Mesh& m) { return build_plane_mesh(m.a, m.b, m.nx, m.ny, m.x0, m.y0); }

}  // namespace parax::grid
