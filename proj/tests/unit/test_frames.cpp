#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "parax/frames.hpp"

using namespace parax::frames;

TEST_CASE("constants") {
  CHECK_NOTHROW(si_electron().validate());
  CHECK_NOTHROW(natural_units().validate());
  PhysicalConstants bad = si_electron();
  bad.mu0 *= 1.01;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = si_electron();
  bad.c = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("scaling identities") {
  const PhysicalConstants pc = si_electron();
  const double l = 1e-3, vbar = 3e6;
  const auto s = compute_scaling(l, vbar, pc, 0.6);
  CHECK(s.eta == doctest::Approx(vbar / pc.c).epsilon(1e-15));
  CHECK(s.T == doctest::Approx(l / vbar).epsilon(1e-15));
  const double E = pc.m * vbar * vbar / (pc.q * l);
  CHECK(s.Ebar == doctest::Approx(E).epsilon(1e-15));
  CHECK(s.Bbar == doctest::Approx(E / pc.c).epsilon(1e-15));
  CHECK(s.rhobar == doctest::Approx(pc.eps0 * E / l).epsilon(1e-15));
  CHECK(s.fbar == doctest::Approx(pc.eps0 * pc.m / (pc.q * pc.q * l * l * vbar)).epsilon(1e-15));
  CHECK(s.Jbar == doctest::Approx(pc.eps0 * E / l * pc.c).epsilon(1e-15));
  CHECK(s.Fbar == doctest::Approx(pc.m * vbar * vbar / l).epsilon(1e-15));
  CHECK_FALSE(s.weak_separation);

  CHECK(compute_scaling(l, 0.5 * pc.c, pc, 0.6).weak_separation);
  CHECK_THROWS_AS(compute_scaling(0.0, vbar, pc, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(compute_scaling(l, pc.c, pc, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(compute_scaling(l, -1.0, pc, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(compute_scaling(l, vbar, pc, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(compute_scaling(l, vbar, pc, 0.0), std::invalid_argument);

  const auto d = dimensionless_scaling(0.1, 0.5);
  CHECK(d.eta == 0.1);
  CHECK(d.beta == 0.5);
  CHECK(d.Ebar == 1.0);
}

TEST_CASE("beam frame map") {
  const double c = 2.0, beta = 0.25;
  LabState s{0.1, -0.2, 3.0, 0.01, 0.02, 0.4, 5.0};
  const auto p = to_beam_frame(s, beta, c);
  CHECK(p.zeta == doctest::Approx(beta * c * 5.0 - 3.0));
  CHECK(p.v_zeta == doctest::Approx(beta * c - 0.4));
  CHECK(p.x_perp[0] == 0.1);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int n = 0; n < 100; ++n) {
    LabState a{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const auto b = from_beam_frame(to_beam_frame(a, beta, c), beta, c);
    CHECK(b.x == a.x);
    CHECK(b.z == doctest::Approx(a.z).epsilon(1e-14));
    CHECK(b.vz == doctest::Approx(a.vz).epsilon(1e-14));
    CHECK(b.t == a.t);
  }
}

TEST_CASE("nondimensionalization round trip") {
  const auto s = compute_scaling(2e-3, 1e6, si_electron(), 0.5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Quantity q : {Quantity::length, Quantity::time, Quantity::velocity, Quantity::electric_field,
                     Quantity::magnetic_field, Quantity::charge_density, Quantity::distribution,
                     Quantity::force, Quantity::current_density}) {
    for (int n = 0; n < 20; ++n) {
      const double v = u(rng) * scale_of(q, s);
      CHECK(redimensionalize(nondimensionalize(v, q, s), q, s) == doctest::Approx(v).epsilon(1e-14));
    }
    std::vector<double> buf{1.0, 2.0, -3.0};
    nondimensionalize(buf, q, s);
    redimensionalize(buf, q, s);
    CHECK(buf[2] == doctest::Approx(-3.0).epsilon(1e-14));
  }
  CHECK(scale_of(Quantity::current_density, s) == doctest::Approx(s.Jbar * s.eta));
  BeamFramePoint p{{1e-3, 2e-3}, 5e-4, {1e5, -2e5}, 3e5, 1e-9};
  const auto r = redimensionalize(nondimensionalize(p, s), s);
  CHECK(r.x_perp[1] == doctest::Approx(p.x_perp[1]).epsilon(1e-14));
  CHECK(r.v_zeta == doctest::Approx(p.v_zeta).epsilon(1e-14));
  CHECK(r.t == doctest::Approx(p.t).epsilon(1e-14));
}
