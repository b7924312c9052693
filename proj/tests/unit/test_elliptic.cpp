#include "doctest.h"

#include <cmath>
#include <numbers>

#include "parax/elliptic.hpp"

using namespace parax::grid;
using namespace parax::elliptic;
using std::numbers::pi;

namespace {

using Fn3 = std::function<double(double, double, double)>;

double max_err(const ScalarField& f, const Fn3& exact) {
  const Mesh& m = f.mesh();
  double e = 0.0;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i)
        e = std::max(e, std::abs(f.at(i, j, k) - exact(m.x(i), m.y(j), m.zeta(k))));
  return e;
}

double sin_mode_error(int n, Method method) {
  auto m = build_plane_mesh(1.0, 1.0, n, n);
  ScalarField rhs(m, [](double x, double y, double) {
    return -2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
  });
  SolverSettings s;
  s.method = method;
  auto u = solve_poisson_2d(rhs, BoundarySpec::all(BcKind::dirichlet), s);
  return max_err(u, [](double x, double y, double) { return std::sin(pi * x) * std::sin(pi * y); });
}

BoundaryTrace tangential_of(const MeshPtr& m, const Fn3& ax, const Fn3& ay) {
  return boundary_tangential_trace(VectorField2(ScalarField(m, ax), ScalarField(m, ay)));
}
BoundaryTrace normal_of(const MeshPtr& m, const Fn3& ax, const Fn3& ay) {
  return boundary_normal_trace(VectorField2(ScalarField(m, ax), ScalarField(m, ay)));
}

}  // namespace

TEST_CASE("settings validation") {
  SolverSettings s;
  s.tolerance = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.tolerance = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.tolerance = 1e-8;
  s.max_iterations = -1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("zero data gives zero") {
  auto m = build_plane_mesh(1.0, 1.0, 9, 9);
  auto u = solve_poisson_2d(ScalarField(m), BoundarySpec::all(BcKind::dirichlet));
  CHECK(u.is_zero());
  auto v = build_mesh(1.0, 1.0, 1.0, 9, 9, 9);
  auto w = solve_anisotropic_poisson_3d(0.75, ScalarField(v), BoundarySpec::all(BcKind::dirichlet));
  CHECK(w.is_zero());
  auto d = solve_divcurl_2d(ScalarField(m), ScalarField(m), BoundaryTrace::zeros(*m),
                            TraceKind::tangential, 0.0);
  CHECK(d.is_zero());
}

TEST_CASE("dirichlet sine mode converges at second order") {
  for (Method method : {Method::direct, Method::conjugate_gradient}) {
    const double e1 = sin_mode_error(17, method), e2 = sin_mode_error(33, method);
    CHECK(e1 < 1e-2);
    CHECK(std::log2(e1 / e2) > 1.9);
  }
}

TEST_CASE("direct and iterative agree") {
  auto m = build_plane_mesh(2.0, 1.0, 21, 13);
  ScalarField rhs(m, [](double x, double y, double) { return std::exp(x) * (1 + y * y); });
  BoundarySpec bc = BoundarySpec::all(BcKind::dirichlet);
  bc[Face::x_hi] = BcKind::neumann;
  bc.set(Face::x_lo, *m, [](double, double y, double) { return y; });
  bc.set(Face::x_hi, *m, [](double, double y, double) { return std::cos(y); });
  SolverSettings a, b;
  a.method = Method::direct;
  b.method = Method::conjugate_gradient;
  SolveReport ra, rb;
  auto ua = solve_poisson_2d(rhs, bc, a, &ra);
  auto ub = solve_poisson_2d(rhs, bc, b, &rb);
  CHECK(ra.used == Method::direct);
  CHECK(rb.used == Method::conjugate_gradient);
  CHECK(rb.relative_residual <= 1e-10);
  CHECK((ua - ub).max_abs() < 1e-8);

  PoissonOperator op(m, 1.0, bc.kind, a);
  auto lu = op.apply(ua, bc);
  double worst = 0.0;
  for (int j = 1; j < m->ny - 1; ++j)
    for (int i = 1; i < m->nx; ++i) worst = std::max(worst, std::abs(lu.at(i, j) - rhs.at(i, j)));
  CHECK(worst < 1e-8 * rhs.max_abs());
}

TEST_CASE("pure neumann problems") {
  auto m = build_plane_mesh(1.0, 1.0, 33, 33);
  const Fn3 exact = [](double x, double y, double) { return std::cos(pi * x) * std::cos(pi * y); };
  ScalarField rhs(m, [&](double x, double y, double z) { return -2.0 * pi * pi * exact(x, y, z); });
  for (Method method : {Method::direct, Method::conjugate_gradient}) {
    SolverSettings s;
    s.method = method;
    auto u = solve_poisson_2d(rhs, BoundarySpec::all(BcKind::neumann), s);
    CHECK(max_err(u, exact) < 5e-3);
    CHECK(std::abs(plane_integral(u)) < 1e-10);
  }
  ScalarField one(m, 1.0);
  CHECK_THROWS_AS(solve_poisson_2d(one, BoundarySpec::all(BcKind::neumann)), IncompatibleData);

  // Compatible non-homogeneous flux: u = x^2/2 gives du/dnu = 1 on x = 1, 0 elsewhere.
  BoundarySpec bc = BoundarySpec::all(BcKind::neumann);
  bc.set(Face::x_hi, *m, [](double, double, double) { return 1.0; });
  auto u = solve_poisson_2d(one, bc);
  const double shift = u.at(0, 0);
  CHECK(max_err(u, [&](double x, double, double) { return 0.5 * x * x + shift; }) < 1e-8);
  CHECK(std::abs(plane_integral(u)) < 1e-12);
}

TEST_CASE("non-convergence is reported") {
  auto m = build_plane_mesh(1.0, 1.0, 33, 33);
  ScalarField rhs(m, [](double x, double y, double) { return std::sin(3 * x) + y; });
  SolverSettings s;
  s.method = Method::conjugate_gradient;
  s.max_iterations = 2;
  try {
    solve_poisson_2d(rhs, BoundarySpec::all(BcKind::dirichlet), s);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.report.iterations == 2);
    CHECK(e.report.residual_history.size() == 3u);
    CHECK(e.report.relative_residual > 1e-10);
  }
}

TEST_CASE("anisotropic 3d manufactured solution") {
  const double kappa = 0.75, Z = 2.0;
  const Fn3 exact = [=](double x, double y, double z) {
    return std::sin(pi * x) * std::sin(pi * y) * std::sin(pi * z / Z);
  };
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const int n = r == 0 ? 9 : 17;
    auto m = build_mesh(1.0, 1.0, Z, n, n, n);
    ScalarField rhs(m, [&](double x, double y, double z) {
      return -(2.0 * pi * pi + kappa * pi * pi / (Z * Z)) * exact(x, y, z);
    });
    SolveReport rep;
    auto u = solve_anisotropic_poisson_3d(kappa, rhs, BoundarySpec::all(BcKind::dirichlet), {}, &rep);
    CHECK(rep.relative_residual <= 1e-10);
    err[r] = max_err(u, exact);
  }
  CHECK(std::log2(err[0] / err[1]) > 1.9);
  auto m = build_mesh(1.0, 1.0, 1.0, 5, 5, 5);
  CHECK_THROWS_AS(solve_anisotropic_poisson_3d(1.0, ScalarField(m), BoundarySpec{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_anisotropic_poisson_3d(0.0, ScalarField(m), BoundarySpec{}),
                  std::invalid_argument);
}

TEST_CASE("slab-symmetric source reduces to the planar solve") {
  auto v = build_mesh(1.0, 1.0, 1.0, 17, 17, 9);
  auto p = plane_of(*v);
  const Fn3 src = [](double x, double y, double) { return std::exp(x - y) + 3.0 * x * y; };
  BoundarySpec bc = BoundarySpec::all(BcKind::dirichlet);
  bc[Face::zeta_lo] = bc[Face::zeta_hi] = BcKind::neumann;
  auto u3 = solve_anisotropic_poisson_3d(0.5, ScalarField(v, src), bc);
  auto u2 = solve_poisson_2d(ScalarField(p, src), BoundarySpec::all(BcKind::dirichlet));
  for (int k = 0; k < v->nz; ++k) CHECK((u3.slice(k, p) - u2).max_abs() < 1e-8);
}

TEST_CASE("div-curl recovers affine fields") {
  auto m = build_plane_mesh(1.0, 1.0, 33, 33, -0.5, -0.5);
  const Fn3 x = [](double x, double, double) { return x; };
  const Fn3 y = [](double, double y, double) { return y; };
  const Fn3 mx = [](double, double y, double) { return -y; };

  SUBCASE("gradient field, tangential data") {
    auto a = solve_divcurl_2d(ScalarField(m, 2.0), ScalarField(m), tangential_of(m, x, y),
                              TraceKind::tangential, 0.0);
    CHECK(max_err(a.x, x) < 1e-3);
    CHECK(max_err(a.y, y) < 1e-3);
  }
  SUBCASE("rotation field, tangential data") {
    DivCurlReport rep;
    auto a = solve_divcurl_2d(ScalarField(m), ScalarField(m, 2.0), tangential_of(m, mx, x),
                              TraceKind::tangential, 2.0 * m->area(), {}, &rep);
    CHECK(max_err(a.x, mx) < 1e-3);
    CHECK(max_err(a.y, x) < 1e-3);
    CHECK(rep.constraint_defect < 1e-12);
    CHECK(circulation(a) == doctest::Approx(2.0).epsilon(1e-3));
  }
  SUBCASE("gradient field, normal data") {
    auto a = solve_divcurl_2d(ScalarField(m, 2.0), ScalarField(m), normal_of(m, x, y),
                              TraceKind::normal, 2.0 * m->area());
    CHECK(max_err(a.x, x) < 1e-3);
    CHECK(max_err(a.y, y) < 1e-3);
    CHECK(flux(a) == doctest::Approx(2.0).epsilon(1e-3));
  }
  SUBCASE("inconsistent circulation") {
    CHECK_THROWS_AS(solve_divcurl_2d(ScalarField(m), ScalarField(m, 2.0), tangential_of(m, mx, x),
                                     TraceKind::tangential, 0.0),
                    IncompatibleData);
  }
}

TEST_CASE("div-curl converges at second order on a smooth field") {
  const Fn3 ax = [](double x, double y, double) { return std::sin(pi * x) * std::cos(y); };
  const Fn3 ay = [](double x, double y, double) { return std::exp(x) * y * y; };
  const Fn3 div = [](double x, double y, double) {
    return pi * std::cos(pi * x) * std::cos(y) + 2.0 * std::exp(x) * y;
  };
  const Fn3 curl = [](double x, double y, double) {
    return std::exp(x) * y * y + std::sin(pi * x) * std::sin(y);
  };
  for (TraceKind kind : {TraceKind::tangential, TraceKind::normal}) {
    double err[2];
    for (int r = 0; r < 2; ++r) {
      auto m = build_plane_mesh(1.0, 1.0, r == 0 ? 17 : 33, r == 0 ? 17 : 33);
      ScalarField d(m, div), c(m, curl);
      auto data = kind == TraceKind::tangential ? tangential_of(m, ax, ay) : normal_of(m, ax, ay);
      const double constraint =
          kind == TraceKind::tangential ? plane_integral(c) : plane_integral(d);
      auto a = solve_divcurl_2d(d, c, data, kind, constraint);
      err[r] = std::max(max_err(a.x, ax), max_err(a.y, ay));
    }
    CHECK(std::log2(err[0] / err[1]) > 1.9);
  }
}
