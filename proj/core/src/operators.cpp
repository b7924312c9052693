#include "parax/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parax::grid {

namespace {

enum class Axis { x, y, zeta };

struct Line {
  int n;
  std::size_t stride;
  double h;
};

Line line_of(const Mesh& m, Axis ax) {
  switch (ax) {
    case Axis::x: return {m.nx, 1, m.hx};
    case Axis::y: return {m.ny, static_cast<std::size_t>(m.nx), m.hy};
    case Axis::zeta: return {m.nz, m.plane_size(), m.hz};
  }
  return {0, 0, 0.0};
}

// Calls fn(start offset) for every grid line along `ax`.
template <class Fn>
void for_lines(const Mesh& m, Axis ax, Fn&& fn) {
  switch (ax) {
    case Axis::x:
      for (int k = 0; k < m.nz; ++k)
        for (int j = 0; j < m.ny; ++j) fn(m.index(0, j, k));
      break;
    case Axis::y:
      for (int k = 0; k < m.nz; ++k)
        for (int i = 0; i < m.nx; ++i) fn(m.index(i, 0, k));
      break;
    case Axis::zeta:
      for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) fn(m.index(i, j, 0));
      break;
  }
}

ScalarField first_derivative(const ScalarField& f, Axis ax) {
  const Mesh& m = f.mesh();
  const Line L = line_of(m, ax);
  if (L.n < 3) throw std::invalid_argument("derivative needs at least 3 nodes along the axis");
  ScalarField out(f.mesh_ptr());
  const double inv2h = 1.0 / (2.0 * L.h);
  for_lines(m, ax, [&](std::size_t s0) {
    auto in = [&](int i) { return f[s0 + i * L.stride]; };
    auto put = [&](int i, double v) { out[s0 + i * L.stride] = v; };
    put(0, (-3.0 * in(0) + 4.0 * in(1) - in(2)) * inv2h);
    for (int i = 1; i < L.n - 1; ++i) put(i, (in(i + 1) - in(i - 1)) * inv2h);
    const int e = L.n - 1;
    put(e, (3.0 * in(e) - 4.0 * in(e - 1) + in(e - 2)) * inv2h);
  });
  return out;
}

ScalarField first_derivative4(const ScalarField& f, Axis ax) {
  const Mesh& m = f.mesh();
  const Line L = line_of(m, ax);
  if (L.n < 5) return first_derivative(f, ax);
  ScalarField out(f.mesh_ptr());
  const double inv = 1.0 / (12.0 * L.h);
  for_lines(m, ax, [&](std::size_t s0) {
    auto in = [&](int i) { return f[s0 + i * L.stride]; };
    auto put = [&](int i, double v) { out[s0 + i * L.stride] = v; };
    const int e = L.n - 1;
    put(0, (-25.0 * in(0) + 48.0 * in(1) - 36.0 * in(2) + 16.0 * in(3) - 3.0 * in(4)) * inv);
    put(1, (-3.0 * in(0) - 10.0 * in(1) + 18.0 * in(2) - 6.0 * in(3) + in(4)) * inv);
    for (int i = 2; i < e - 1; ++i)
      put(i, (in(i - 2) - 8.0 * in(i - 1) + 8.0 * in(i + 1) - in(i + 2)) * inv);
    put(e - 1, (3.0 * in(e) + 10.0 * in(e - 1) - 18.0 * in(e - 2) + 6.0 * in(e - 3) - in(e - 4)) * inv);
    put(e, (25.0 * in(e) - 48.0 * in(e - 1) + 36.0 * in(e - 2) - 16.0 * in(e - 3) + 3.0 * in(e - 4)) * inv);
  });
  return out;
}

ScalarField second_derivative(const ScalarField& f, Axis ax) {
  const Mesh& m = f.mesh();
  const Line L = line_of(m, ax);
  if (L.n < 3) throw std::invalid_argument("derivative needs at least 3 nodes along the axis");
  ScalarField out(f.mesh_ptr());
  const double ih2 = 1.0 / (L.h * L.h);
  for_lines(m, ax, [&](std::size_t s0) {
    auto in = [&](int i) { return f[s0 + i * L.stride]; };
    auto put = [&](int i, double v) { out[s0 + i * L.stride] = v; };
    for (int i = 1; i < L.n - 1; ++i) put(i, (in(i + 1) - 2.0 * in(i) + in(i - 1)) * ih2);
    const int e = L.n - 1;
    if (L.n >= 4) {
      put(0, (2.0 * in(0) - 5.0 * in(1) + 4.0 * in(2) - in(3)) * ih2);
      put(e, (2.0 * in(e) - 5.0 * in(e - 1) + 4.0 * in(e - 2) - in(e - 3)) * ih2);
    } else {
      put(0, out[s0 + L.stride]);
      put(e, out[s0 + L.stride]);
    }
  });
  return out;
}

double trapezoid(const std::vector<double>& v, double h) {
  if (v.size() < 2) return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t n = 1; n + 1 < v.size(); ++n) s += v[n];
  return s * h;
}

}  // namespace

ScalarField d_dx(const ScalarField& f) { return first_derivative(f, Axis::x); }
ScalarField d_dy(const ScalarField& f) { return first_derivative(f, Axis::y); }
ScalarField d_dx4(const ScalarField& f) { return first_derivative4(f, Axis::x); }
ScalarField d_dy4(const ScalarField& f) { return first_derivative4(f, Axis::y); }
ScalarField d_dzeta4(const ScalarField& f) { return first_derivative4(f, Axis::zeta); }
VectorField2 d_dzeta4(const VectorField2& f) { return {d_dzeta4(f.x), d_dzeta4(f.y)}; }
VectorField2 grad_perp4(const ScalarField& phi) { return {d_dx4(phi), d_dy4(phi)}; }
ScalarField div_perp4(const VectorField2& a) { return d_dx4(a.x) + d_dy4(a.y); }
VectorField2 curl_perp_scalar4(const ScalarField& phi) { return {d_dy4(phi), -1.0 * d_dx4(phi)}; }
ScalarField curl_perp_vector4(const VectorField2& a) { return d_dx4(a.y) - d_dy4(a.x); }
ScalarField d_dzeta(const ScalarField& f) { return first_derivative(f, Axis::zeta); }
ScalarField d2_dzeta2(const ScalarField& f) { return second_derivative(f, Axis::zeta); }
VectorField2 d_dzeta(const VectorField2& f) { return {d_dzeta(f.x), d_dzeta(f.y)}; }
VectorField2 d2_dzeta2(const VectorField2& f) { return {d2_dzeta2(f.x), d2_dzeta2(f.y)}; }

VectorField2 grad_perp(const ScalarField& phi) { return {d_dx(phi), d_dy(phi)}; }

ScalarField div_perp(const VectorField2& a) { return d_dx(a.x) + d_dy(a.y); }

VectorField2 curl_perp_scalar(const ScalarField& phi) { return {d_dy(phi), -1.0 * d_dx(phi)}; }

ScalarField curl_perp_vector(const VectorField2& a) { return d_dx(a.y) - d_dy(a.x); }

ScalarField laplace_perp(const ScalarField& phi) {
  return second_derivative(phi, Axis::x) + second_derivative(phi, Axis::y);
}

VectorField2 cross_ez(const VectorField2& a) { return {a.y, -1.0 * a.x}; }

BoundaryTrace BoundaryTrace::zeros(const Mesh& m) {
  BoundaryTrace t;
  for (Side s : all_sides) t[s].assign(m.side_count(s), 0.0);
  return t;
}

double BoundaryTrace::max_abs() const {
  double r = 0.0;
  for (const auto& v : side)
    for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

namespace {

template <class Dot>
BoundaryTrace side_trace(const VectorField2& a, int k, Dot&& dot) {
  const Mesh& m = a.mesh();
  BoundaryTrace t = BoundaryTrace::zeros(m);
  for (Side s : all_sides) {
    const auto nu = m.side_normal(s);
    for (int n = 0; n < m.side_count(s); ++n) {
      const auto ij = m.side_node(s, n);
      const std::size_t id = m.index(ij[0], ij[1], k);
      t[s][n] = dot(a.x[id], a.y[id], nu);
    }
  }
  return t;
}

}  // namespace

BoundaryTrace boundary_tangential_trace(const VectorField2& a, int k) {
  return side_trace(a, k, [](double ax, double ay, std::array<double, 2> nu) {
    return -ax * nu[1] + ay * nu[0];
  });
}

BoundaryTrace boundary_normal_trace(const VectorField2& a, int k) {
  return side_trace(a, k, [](double ax, double ay, std::array<double, 2> nu) {
    return ax * nu[0] + ay * nu[1];
  });
}

std::vector<double> boundary_node_tangential(const VectorField2& a, int k) {
  const Mesh& m = a.mesh();
  std::vector<double> r;
  r.reserve(m.boundary.size());
  for (const auto& b : m.boundary) {
    const std::size_t id = m.index(b.i, b.j, k);
    r.push_back(a.x[id] * b.tangent[0] + a.y[id] * b.tangent[1]);
  }
  return r;
}

std::vector<double> boundary_node_normal(const VectorField2& a, int k) {
  const Mesh& m = a.mesh();
  std::vector<double> r;
  r.reserve(m.boundary.size());
  for (const auto& b : m.boundary) {
    const std::size_t id = m.index(b.i, b.j, k);
    r.push_back(a.x[id] * b.normal[0] + a.y[id] * b.normal[1]);
  }
  return r;
}

double line_integral(const Mesh& m, const BoundaryTrace& t) {
  double s = 0.0;
  for (Side sd : all_sides) s += trapezoid(t[sd], m.side_spacing(sd));
  return s;
}

double circulation(const VectorField2& a, int k) {
  return line_integral(a.mesh(), boundary_tangential_trace(a, k));
}

double flux(const VectorField2& a, int k) {
  return line_integral(a.mesh(), boundary_normal_trace(a, k));
}

double node_weight(const Mesh& m, int i, int j, int k) {
  double w = m.hx * m.hy;
  if (i == 0 || i == m.nx - 1) w *= 0.5;
  if (j == 0 || j == m.ny - 1) w *= 0.5;
  if (m.nz > 1) {
    w *= m.hz;
    if (k == 0 || k == m.nz - 1) w *= 0.5;
  }
  return w;
}

double plane_integral(const ScalarField& f, int k) {
  const Mesh& m = f.mesh();
  double s = 0.0;
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      double w = m.hx * m.hy;
      if (i == 0 || i == m.nx - 1) w *= 0.5;
      if (j == 0 || j == m.ny - 1) w *= 0.5;
      s += w * f.at(i, j, k);
    }
  return s;
}

double volume_integral(const ScalarField& f) {
  const Mesh& m = f.mesh();
  double s = 0.0;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) s += node_weight(m, i, j, k) * f.at(i, j, k);
  return s;
}

}  // namespace parax::grid
