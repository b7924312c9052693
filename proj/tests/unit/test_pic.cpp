#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "parax/operators.hpp"
#include "parax/pic.hpp"

using namespace parax;
using namespace parax::pic;
using grid::ScalarField;
using hierarchy::FieldOrder;

namespace {

MeshPtr unit_mesh(int n) { return grid::build_mesh(1.0, 1.0, 1.0, n + 1, n + 1, n + 1); }

/// Regular lattice of particles drifting with a common velocity.
ParticleEnsemble lattice(int per_axis, std::array<double, 3> v) {
  ParticleEnsemble p;
  const double w = 1.0 / (per_axis * per_axis * per_axis);
  for (int k = 0; k < per_axis; ++k)
    for (int j = 0; j < per_axis; ++j)
      for (int i = 0; i < per_axis; ++i)
        p.add(0.3 + 0.4 * (i + 0.5) / per_axis, 0.3 + 0.4 * (j + 0.5) / per_axis,
              0.2 + 0.4 * (k + 0.5) / per_axis, v[0], v[1], v[2], w);
  return p;
}

/// Smooth sin^4 profile, four particles per cell and axis, drifting one
/// lattice spacing per step along zeta.
double lattice_residual(int n) {
  auto m = unit_mesh(n);
  const double d = 1.0 / (4.0 * n), dt = d;
  auto bump = [](double u, double lo, double hi) {
    return std::pow(std::sin(std::numbers::pi * (u - lo) / (hi - lo)), 4);
  };
  ParticleEnsemble p;
  for (int k = n / 2; k < 3 * n; ++k)
    for (int j = n / 2; j < 7 * n / 2; ++j)
      for (int i = n / 2; i < 7 * n / 2; ++i) {
        const double x = (i + 0.5) * d, y = (j + 0.5) * d, z = (k + 0.5) * d;
        p.add(x, y, z, 0.0, 0.0, 1.0,
              bump(x, 0.125, 0.875) * bump(y, 0.125, 0.875) * bump(z, 0.125, 0.75) * d * d * d);
      }
  const int steps = static_cast<int>(std::lround(0.1 / dt));
  SourceMoments prev = deposit_sources(p, m);
  double worst = 0.0;
  for (int s = 0; s < steps; ++s) {
    const SourceMoments a = deposit_sources(p, m);
    drift(p, *m, dt);
    SourceMoments b = deposit_sources(p, m);
    b.Jperp = 0.5 * (a.Jperp + b.Jperp);
    b.Jzeta = 0.5 * (a.Jzeta + b.Jzeta);
    worst = std::max(worst, check_charge_conservation({prev, b}, dt));
    prev = b;
  }
  return worst;
}

FieldHierarchy constant_hierarchy(const MeshPtr& m, int orders) {
  FieldHierarchy h;
  h.mesh = m;
  h.eta = 0.5;
  for (int n = 0; n < orders; ++n) h.orders.push_back(FieldOrder::zeros(m, n));
  return h;
}

}  // namespace

TEST_CASE("cold beam has exactly the mean velocity") {
  auto m = unit_mesh(8);
  SamplingConfig cfg;
  cfg.family = Family::cold_beam;
  cfg.count = 500;
  const auto p = sample_initial_distribution(cfg, *m);
  REQUIRE(p.size() == 500);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.vx[i] == 0.0);
    CHECK(p.vy[i] == 0.0);
    CHECK(p.vzeta[i] == 0.0);
  }
  CHECK(p.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform disc mean radius is 2r/3") {
  auto m = unit_mesh(8);
  SamplingConfig cfg;
  cfg.count = 20000;
  cfg.rx = cfg.ry = 0.3;
  cfg.seed = 7;
  const auto p = sample_initial_distribution(cfg, *m);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::hypot(p.x[i] - 0.5, p.y[i] - 0.5);
  s /= static_cast<double>(p.size());
  CHECK(std::abs(s - 0.2) < 0.3 * 3.0 / std::sqrt(20000.0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.zeta[i] >= cfg.zeta_lo);
    CHECK(p.zeta[i] <= cfg.zeta_hi);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  auto m = unit_mesh(8);
  SamplingConfig cfg;
  cfg.family = Family::gaussian;
  cfg.rx = cfg.ry = 0.1;
  cfg.v_sigma_perp = 0.1;
  cfg.v_sigma_zeta = 0.1;
  const auto a = sample_initial_distribution(cfg, *m), b = sample_initial_distribution(cfg, *m);
  CHECK(a.x == b.x);
  CHECK(a.vzeta == b.vzeta);
  cfg.seed = 2;
  CHECK(sample_initial_distribution(cfg, *m).x != a.x);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.x[i] > 0.0);
    CHECK(a.x[i] < 1.0);
  }
}

TEST_CASE("sampling rejects bad configurations") {
  auto m = unit_mesh(8);
  SamplingConfig cfg;
  cfg.count = 0;
  CHECK_THROWS_AS(sample_initial_distribution(cfg, *m), std::invalid_argument);
  cfg.count = 10;
  cfg.rx = 0.6;
  CHECK_THROWS_AS(sample_initial_distribution(cfg, *m), std::invalid_argument);
  CHECK_THROWS_AS(parse_family("plasma"), std::invalid_argument);
  CHECK(parse_family(to_string(Family::gaussian)) == Family::gaussian);
}

TEST_CASE("deposit at a node equals weight over dual volume") {
  auto m = unit_mesh(4);
  ParticleEnsemble p;
  p.add(0.5, 0.5, 0.5, 0.0, 0.0, 2.0, 0.3);
  const auto s = deposit_sources(p, m);
  const double vol = 0.25 * 0.25 * 0.25;
  CHECK(s.rho.at(2, 2, 2) == doctest::Approx(0.3 / vol).epsilon(1e-12));
  CHECK(s.Jzeta.at(2, 2, 2) == doctest::Approx(0.6 / vol).epsilon(1e-12));
  CHECK(s.rho.at(1, 2, 2) == 0.0);
}

TEST_CASE("deposit at a cell centre splits equally") {
  auto m = unit_mesh(4);
  ParticleEnsemble p;
  p.add(0.375, 0.375, 0.375, 0.0, 0.0, 0.0, 1.0);
  const auto s = deposit_sources(p, m);
  const double expect = 0.125 / (0.25 * 0.25 * 0.25);
  for (int k = 1; k <= 2; ++k)
    for (int j = 1; j <= 2; ++j)
      for (int i = 1; i <= 2; ++i) CHECK(s.rho.at(i, j, k) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("deposited charge integrates to the total weight") {
  auto m = unit_mesh(8);
  SamplingConfig cfg;
  cfg.family = Family::gaussian;
  cfg.count = 3000;
  cfg.rx = cfg.ry = 0.15;
  const auto p = sample_initial_distribution(cfg, *m);
  DepositReport rep;
  const auto s = deposit_sources(p, m, 1.0, 0, &rep);
  double q = 0.0;
  for (int k = 0; k < m->nz; ++k)
    for (int j = 0; j < m->ny; ++j)
      for (int i = 0; i < m->nx; ++i) q += s.rho.at(i, j, k) * grid::node_weight(*m, i, j, k);
  CHECK(q == doctest::Approx(p.total_weight()).epsilon(1e-12));
  CHECK(rep.skipped == 0);
  const auto s1 = deposit_sources(p, m, 1.0, 1), s3 = deposit_sources(p, m, 1.0, 3);
  CHECK(s1.rho.data() == s3.rho.data());
}

TEST_CASE("deposit skips particles outside") {
  auto m = unit_mesh(4);
  ParticleEnsemble p;
  p.add(1.5, 0.5, 0.5, 0, 0, 0, 1.0);
  DepositReport rep;
  const auto s = deposit_sources(p, m, 1.0, 0, &rep);
  CHECK(rep.skipped == 1);
  CHECK(s.rho.is_zero());
}

TEST_CASE("force assembly matches worked examples") {
  auto m = unit_mesh(4);
  auto h = constant_hierarchy(m, 2);
  h.orders[0].Ecal.x = ScalarField(m, 2.0);
  h.orders[0].Ez = ScalarField(m, 1.0);
  h.orders[0].Bz = ScalarField(m, 1.0);
  const auto f0 = assemble_force(0, h, 0.4, 0.6, 0.3, 1.0, 0.0, 0.0);
  CHECK(f0.Fperp[0][0] == doctest::Approx(2.0));
  CHECK(f0.Fperp[0][1] == doctest::Approx(0.0));
  CHECK(f0.Fz[0] == doctest::Approx(1.0));
  const auto f1 = assemble_force(1, h, 0.4, 0.6, 0.3, 1.0, 0.0, 0.0);
  CHECK(f1.Fperp[1][0] == doctest::Approx(0.0));
  CHECK(f1.Fperp[1][1] == doctest::Approx(-1.0));
  CHECK(f1.Fz[1] == doctest::Approx(0.0));
  CHECK(f1.total_perp[1] == doctest::Approx(-0.5));
  h.orders[0].Bz = ScalarField(m, 0.0);
  h.orders[0].Bperp.y = ScalarField(m, 1.0);
  const auto f2 = assemble_force(1, h, 0.4, 0.6, 0.3, 1.0, 0.0, 0.0);
  CHECK(f2.Fz[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(assemble_force(2, h, 0.4, 0.6, 0.3, 0, 0, 0), std::out_of_range);
}

TEST_CASE("interpolation reproduces linear fields") {
  auto m = unit_mesh(4);
  const ScalarField f(m, [](double x, double y, double z) { return 1.0 + 2.0 * x - y + 3.0 * z; });
  CHECK(interpolate(f, 0.31, 0.77, 0.12) == doctest::Approx(1.0 + 0.62 - 0.77 + 0.36).epsilon(1e-13));
  CHECK(interpolate(f, 1.0, 1.0, 1.0) == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("zero force gives ballistic drift and absorption") {
  auto m = unit_mesh(4);
  ParticleEnsemble p;
  p.add(0.5, 0.5, 0.5, 0.1, -0.2, 0.3, 1.0);
  p.add(0.95, 0.5, 0.5, 1.0, 0.0, 0.0, 1.0);
  const ForceEvaluator zero = [](const ParticleEnsemble&, std::size_t) { return std::array<double, 3>{}; };
  CHECK(push_particles(p, zero, *m, 0.1) == 1);
  REQUIRE(p.size() == 1);
  CHECK(p.id[0] == 0);
  CHECK(p.x[0] == doctest::Approx(0.51));
  CHECK(p.y[0] == doctest::Approx(0.48));
  CHECK(p.zeta[0] == doctest::Approx(0.53));
  CHECK(p.absorbed == 1);
}

TEST_CASE("constant longitudinal force decelerates v_zeta") {
  auto m = unit_mesh(4);
  ParticleEnsemble p;
  p.add(0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0);
  const ForceEvaluator fz = [](const ParticleEnsemble&, std::size_t) { return std::array<double, 3>{0, 0, 1}; };
  const double dt = 0.01;
  for (int k = 1; k <= 5; ++k) {
    push_particles(p, fz, *m, dt);
    CHECK(p.vzeta[0] == doctest::Approx(-k * dt).epsilon(1e-12));
  }
}

TEST_CASE("static ensemble conserves charge exactly") {
  auto m = unit_mesh(8);
  const auto p = lattice(4, {0.0, 0.0, 0.0});
  const auto s = deposit_sources(p, m);
  CHECK(check_charge_conservation({s, s}, 0.1) == 0.0);
  CHECK_THROWS_AS(check_charge_conservation({s}, 0.1), std::invalid_argument);
}

TEST_CASE("moving lattice charge residual converges under h and dt halving") {
  const double coarse = lattice_residual(16), fine = lattice_residual(32);
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("zero charge run is ballistic") {
  PicConfig cfg;
  cfg.mesh = unit_mesh(8);
  cfg.charge = 0.0;
  cfg.steps = 3;
  cfg.dt = 0.02;
  cfg.sampling.count = 50;
  cfg.sampling.v_mean = {0.1, 0.0, 0.2};
  std::vector<double> x0;
  std::vector<double> x3;
  run_pic(cfg, [&](const StepRecord& r) {
    if (r.diag.step == 0) x0 = r.particles.x;
    if (r.diag.step == 3) x3 = r.particles.x;
    for (const auto& n : r.diag.norms) CHECK(n.Ez == 0.0);
  });
  REQUIRE(x3.size() == x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) CHECK(x3[i] == doctest::Approx(x0[i] + 0.006));
}

TEST_CASE("cold beam expands under its own space charge") {
  PicConfig cfg;
  cfg.mesh = grid::build_mesh(1.0, 1.0, 1.0, 13, 13, 9);
  cfg.sampling.family = Family::cold_beam;
  cfg.sampling.count = 400;
  cfg.sampling.rx = cfg.sampling.ry = 0.15;
  cfg.n_max = 1;
  cfg.steps = 4;
  cfg.dt = 0.05;
  cfg.charge = 1.0;
  const auto d = run_pic(cfg);
  REQUIRE(d.size() == 5);
  for (std::size_t k = 1; k < d.size(); ++k) {
    CHECK(d[k].rms_radius > d[k - 1].rms_radius);
    CHECK(d[k].charge_residual >= 0.0);
    CHECK(d[k].norms.size() == 2);
  }
  CHECK(d[0].total_weight == doctest::Approx(1.0));
}

TEST_CASE("pic config validation") {
  PicConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.mesh = unit_mesh(4);
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.dt = 0.1;
  cfg.beta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
