#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "parax/io.hpp"
#include "parax/operators.hpp"
#include "parax/pic.hpp"
#include "parax/verify.hpp"

using namespace parax;
using grid::ScalarField;
using grid::VectorField2;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s [%d] %s: %s; runtime %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), s, budget_s, in_time ? "" : " EXCEEDED");
  std::fflush(stdout);
}

double interior_diff(const ScalarField& a, const ScalarField& b) { return grid::interior_max(a - b); }

/// 1. The three transverse identities on quadratics.
Outcome identities() {
  const auto m = grid::build_plane_mesh(1.0, 1.0, 33, 33, -0.5, -0.5);
  const VectorField2 a(ScalarField(m, [](double x, double y, double) { return 2 * x * x - x * y + 3 * y * y + x; }),
                       ScalarField(m, [](double x, double y, double) { return -x * x + 4 * x * y + y * y - y; }));
  const ScalarField phi(m, [](double x, double y, double) { return x * x - 2 * x * y + 3 * y * y + x - y; });
  const double e1 = interior_diff(grid::div_perp(grid::cross_ez(a)), grid::curl_perp_vector(a));
  const double e2 = interior_diff(grid::curl_perp_vector(grid::cross_ez(a)), -1.0 * grid::div_perp(a));
  const double e3 = interior_diff(grid::curl_perp_vector(grid::curl_perp_scalar(phi)), -1.0 * grid::laplace_perp(phi));
  const ScalarField curl_exact(m, [](double x, double y, double) { return (-2 * x + 4 * y) - (-x + 6 * y); });
  const ScalarField lap_exact(m, 8.0);
  const double e4 = interior_diff(grid::curl_perp_vector(a), curl_exact);
  const double e5 = interior_diff(grid::laplace_perp(phi), lap_exact);
  const double worst = std::max({e1, e2, e3, e4, e5});
  /// Round-off of second differences: ~ eps |phi| / h^2.
  const double tol = 1e-11;
  return {worst <= tol, fmt("worst interior defect %.2e over 3 identities + closed forms (tol %.0e)", worst, tol)};
}

/// 2. Grid convergence of the five solvers.
Outcome mms() {
  struct Study {
    const char* target;
    std::vector<int> grids;
  };
  const Study studies[] = {{"poisson-2d", {16, 32, 64}},
                           {"anisotropic-3d", {16, 24, 32}},
                           {"divcurl-2d", {16, 32, 64}},
                           {"ez-order", {16, 24, 32}},
                           {"eperp-order", {16, 24, 32}}};
  bool ok = true;
  std::string d;
  for (const auto& s : studies) {
    const auto r = verify::convergence_study(s.target, s.grids);
    ok = ok && r.slope >= 1.9;
    d += fmt("%s%s %.3f", d.empty() ? "" : ", ", s.target, r.slope);
  }
  return {ok, "slopes " + d + " (need >= 1.9)"};
}

/// 3. Zero data stays zero; a chargeless beam is ballistic.
Outcome zero_propagation() {
  const auto m = grid::build_mesh(1.0, 1.0, 1.0, 17, 17, 9);
  hierarchy::FieldHistory hist;
  const auto h = hierarchy::solve_hierarchy(3, {hierarchy::SourceMoments::zeros(m)}, hist, 0.0, 0.5, 0.1, {});
  bool fields_zero = true;
  for (const auto& f : h.orders) fields_zero = fields_zero && f.is_zero();

  pic::PicConfig cfg;
  cfg.mesh = m;
  cfg.charge = 0.0;
  cfg.n_max = 2;
  cfg.steps = 5;
  cfg.dt = 0.02;
  cfg.sampling.count = 200;
  cfg.sampling.v_sigma_perp = 0.2;
  cfg.sampling.v_sigma_zeta = 0.2;
  cfg.sampling.family = pic::Family::gaussian;
  cfg.sampling.rx = cfg.sampling.ry = 0.1;
  const auto start = pic::sample_initial_distribution(cfg.sampling, *m);
  /// Oracle: free flight with the same additions, absorption outside the box.
  auto expect = start;
  bool ballistic = true, pic_fields_zero = true;
  pic::run_pic(cfg, [&](const pic::StepRecord& r) {
    for (const auto& f : r.fields.orders) pic_fields_zero = pic_fields_zero && f.is_zero();
    if (r.diag.step > 0) {
      for (std::size_t i = 0; i < expect.size(); ++i) {
        expect.x[i] += expect.vx[i] * cfg.dt;
        expect.y[i] += expect.vy[i] * cfg.dt;
        expect.zeta[i] += expect.vzeta[i] * cfg.dt;
      }
      expect.absorb_outside(*m);
    }
    ballistic = ballistic && r.particles.x == expect.x && r.particles.y == expect.y &&
                r.particles.zeta == expect.zeta && r.particles.vx == expect.vx && r.particles.vy == expect.vy &&
                r.particles.vzeta == expect.vzeta;
  });
  const bool ok = fields_zero && pic_fields_zero && ballistic;
  return {ok, fmt("hierarchy n<=3 all zero: %s, PIC fields zero: %s, trajectories bitwise ballistic: %s",
                  fields_zero ? "yes" : "no", pic_fields_zero ? "yes" : "no", ballistic ? "yes" : "no")};
}

/// 4. One snapshot, charge-only order-0 sources: higher orders vanish.
Outcome cold_start() {
  const auto m = grid::build_mesh(1.0, 1.0, 1.0, 33, 33, 17);
  auto src = verify::mms_case("static-mode", m, 0.5).sources.at(0);
  src.Jperp = VectorField2(ScalarField(m, 0.0), ScalarField(m, 0.0));
  src.Jzeta = ScalarField(m, 0.0);
  hierarchy::FieldHistory hist;
  const auto h = hierarchy::solve_hierarchy(3, {src}, hist, 0.0, 0.5, 0.1, {});
  const auto& f0 = h.orders[0];
  const double scale = std::max({f0.Ez.max_abs(), f0.Eperp.max_abs(), f0.Ecal.max_abs(), f0.Bperp.max_abs()});
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const auto& f = h.orders[n];
    worst = std::max({worst, f.Ez.max_abs(), f.Bz.max_abs(), f.Eperp.max_abs(), f.Bperp.max_abs(), f.Ecal.max_abs()});
  }
  const double tol = 1e-10 * scale;
  return {scale > 0.0 && worst <= tol,
          fmt("max |F^n|, n=1..3: %.2e vs order-0 scale %.3e (tol %.1e)", worst, scale, tol)};
}

/// 5. Residual scaling with eta.
Outcome eta_scaling() {
  verify::EtaStudyConfig cfg;
  cfg.intervals_perp = 64;
  cfg.intervals_zeta = 32;
  cfg.n_max = 1;
  const auto s = verify::eta_scaling_study(cfg);
  const double s0 = s.fits.at(0).slope, s1 = s.fits.at(1).slope;
  return {s0 >= 0.8 && s1 >= 1.8, fmt("slope n_max=0 %.3f (need >= 0.8), n_max=1 %.3f (need >= 1.8)", s0, s1)};
}

/// 6. Gauss and solenoidal residuals under one halving of h.
Outcome constraints() {
  auto run = [](int n) {
    const auto m = grid::build_mesh(1.0, 1.0, 1.0, n + 1, n + 1, n / 2 + 1);
    const hierarchy::Solvers sv(m, 0.5);
    hierarchy::FieldHistory hist;
    hierarchy::FieldHierarchy h;
    for (int st = 0; st <= 2; ++st) {
      h = hierarchy::solve_hierarchy(1, {verify::quasi_static_sources(m, 0.5, 0.1 * st, 0.1)}, hist, 0.1 * st, 0.5,
                                     0.1, {}, {}, &sv);
      if (st < 2) hist.push(h);
    }
    return h.diagnostics;
  };
  const auto c = run(32), f = run(64);
  bool ok = true;
  std::string d;
  for (std::size_t n = 0; n < c.size(); ++n) {
    for (int which = 0; which < 2; ++which) {
      const double rc = which ? c[n].solenoidal_residual : c[n].gauss_residual;
      const double rf = which ? f[n].solenoidal_residual : f[n].gauss_residual;
      /// Residuals at round-off carry no rate.
      const bool roundoff = rc < 1e-12 && rf < 1e-12;
      const double ratio = rc / rf;
      ok = ok && (roundoff || ratio >= 3.5);
      d += fmt("%s%s^%zu %.2e->%.2e (x%.2f)", d.empty() ? "" : ", ", which ? "solenoidal" : "gauss", n, rc, rf, ratio);
    }
  }
  return {ok, d + " (need ratio >= 3.5)"};
}

/// 7. Charge conservation of a smooth drifting lattice, h and dt halved together.
double lattice_residual(int n) {
  const auto m = grid::build_mesh(1.0, 1.0, 1.0, n + 1, n + 1, n + 1);
  const double d = 1.0 / (4.0 * n), dt = d;
  auto bump = [](double u, double lo, double hi) {
    return std::pow(std::sin(std::numbers::pi * (u - lo) / (hi - lo)), 4);
  };
  pic::ParticleEnsemble p;
  for (int k = n / 2; k < 3 * n; ++k)
    for (int j = n / 2; j < 7 * n / 2; ++j)
      for (int i = n / 2; i < 7 * n / 2; ++i) {
        const double x = (i + 0.5) * d, y = (j + 0.5) * d, z = (k + 0.5) * d;
        p.add(x, y, z, 0.0, 0.0, 1.0, bump(x, 0.125, 0.875) * bump(y, 0.125, 0.875) * bump(z, 0.125, 0.75) * d * d * d);
      }
  const int steps = static_cast<int>(std::lround(0.1 / dt));
  auto prev = pic::deposit_sources(p, m);
  double worst = 0.0;
  for (int s = 0; s < steps; ++s) {
    const auto a = pic::deposit_sources(p, m);
    pic::drift(p, *m, dt);
    auto b = pic::deposit_sources(p, m);
    b.Jperp = 0.5 * (a.Jperp + b.Jperp);
    b.Jzeta = 0.5 * (a.Jzeta + b.Jzeta);
    worst = std::max(worst, pic::check_charge_conservation({prev, b}, dt));
    prev = b;
  }
  return worst;
}

Outcome charge_conservation() {
  const double c = lattice_residual(16), f = lattice_residual(32);
  return {c / f >= 3.0, fmt("residual h=1/16,dt=1/64 %.3e -> h=1/32,dt=1/128 %.3e, ratio %.2f (need >= 3.0)", c, f, c / f)};
}

/// 8. Byte-identical outputs for identical config and seed.
Outcome determinism() {
  io::RunConfig cfg = io::parse_config_text(
      "[mesh]\nnx = 17\nny = 17\nnzeta = 9\n[scaling]\nbeta = 0.5\n[pic]\nN = 4000\nsteps = 3\n"
      "family = gaussian\nrx = 0.1\nry = 0.1\nv_sigma_perp = 0.05\nv_sigma_zeta = 0.05\nseed = 42\n");
  auto run = [&](const char* threads) {
    setenv("PARAX_THREADS", threads, 1);
    return io::execute(io::Verb::pic, cfg);
  };
  const auto a = run("4"), b = run("4"), c = run("1");
  unsetenv("PARAX_THREADS");
  std::size_t csv = 0, same_ab = 0, same_ac = 0;
  for (const auto& [name, content] : a.files) {
    if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
    ++csv;
    const auto ib = b.files.find(name), ic = c.files.find(name);
    if (ib != b.files.end() && ib->second == content) ++same_ab;
    if (ic != c.files.end() && ic->second == content) ++same_ac;
  }
  const bool ok = csv > 0 && same_ab == csv && same_ac == csv && a.files.size() == b.files.size();
  return {ok, fmt("%zu CSVs: %zu identical across two 4-thread runs, %zu identical to the 1-thread run", csv, same_ab,
                  same_ac)};
}

/// 9. Truncation bound of the total force at random particles.
Outcome force_bound() {
  const auto m = grid::build_mesh(1.0, 1.0, 1.0, 33, 33, 17);
  const double eta = 0.1;
  hierarchy::FieldHistory hist;
  hierarchy::FieldHierarchy h;
  for (int st = 0; st <= 2; ++st) {
    h = hierarchy::solve_hierarchy(1, {verify::quasi_static_sources(m, 0.5, 0.1 * st, 0.1)}, hist, 0.1 * st, 0.5, eta,
                                   {});
    if (st < 2) hist.push(h);
  }
  const auto& f1 = h.orders[1];
  const auto& f0 = h.orders[0];
  /// Order-1 force at node q for velocity v: Ecal^1 + (Bz^0 v + vz B^0) x e_z, Ez^1 + v . (B^0 x e_z).
  auto node_force = [&](std::size_t q, double vx, double vy, double vz) {
    const double ax = f0.Bz[q] * vx + vz * f0.Bperp.x[q], ay = f0.Bz[q] * vy + vz * f0.Bperp.y[q];
    return std::array<double, 3>{f1.Ecal.x[q] + ay, f1.Ecal.y[q] - ax, f1.Ez[q] + vx * f0.Bperp.y[q] - vy * f0.Bperp.x[q]};
  };
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::normal_distribution<double> vel(0.0, 0.2);
  double worst_ratio = 0.0, worst_oracle = 0.0;
  const int count = 2000;
  for (int p = 0; p < count; ++p) {
    const double x = pos(rng), y = pos(rng), z = pos(rng), vx = vel(rng), vy = vel(rng), vz = vel(rng);
    const auto s1 = pic::assemble_force(1, h, x, y, z, vx, vy, vz);
    const auto s0 = pic::assemble_force(0, h, x, y, z, vx, vy, vz);
    const double dperp = std::hypot(s1.total_perp[0] - s0.total_perp[0], s1.total_perp[1] - s0.total_perp[1]);
    const double dz = std::abs(s1.total_z - s0.total_z);
    double mperp = 0.0, mz = 0.0;
    for (std::size_t q = 0; q < m->size(); ++q) {
      const auto F = node_force(q, vx, vy, vz);
      mperp = std::max(mperp, std::hypot(F[0], F[1]));
      mz = std::max(mz, std::abs(F[2]));
    }
    worst_ratio = std::max({worst_ratio, dperp / (eta * mperp), dz / (eta * mz)});
    /// Independent trilinear interpolation of the node forces.
    const double u = x / m->hx, v = y / m->hy, w = z / m->hz;
    const int i = std::min(static_cast<int>(u), m->nx - 2), j = std::min(static_cast<int>(v), m->ny - 2),
              k = std::min(static_cast<int>(w), m->nz - 2);
    std::array<double, 3> F{};
    for (int c = 0; c < 8; ++c) {
      const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
      const double wt = (di ? u - i : 1 - (u - i)) * (dj ? v - j : 1 - (v - j)) * (dk ? w - k : 1 - (w - k));
      const auto Fn = node_force(m->index(i + di, j + dj, k + dk), vx, vy, vz);
      for (int e = 0; e < 3; ++e) F[e] += wt * Fn[e];
    }
    const double scale = std::max(mperp, mz);
    worst_oracle = std::max({worst_oracle, std::abs(s1.total_perp[0] - s0.total_perp[0] - eta * F[0]) / scale,
                             std::abs(s1.total_perp[1] - s0.total_perp[1] - eta * F[1]) / scale,
                             std::abs(s1.total_z - s0.total_z - eta * F[2]) / scale});
  }
  const bool ok = worst_ratio <= 1.0 && worst_oracle < 1e-12;
  return {ok, fmt("%d particles: max |dF| / (eta max|F^1|) = %.3f (need <= 1), deviation from interpolation oracle "
                  "%.1e (need < 1e-12)",
                  count, worst_ratio, worst_oracle)};
}

}  // namespace

int main() {
  std::printf("parax acceptance suite %s\n", io::version().c_str());
  criterion(1, "operator identities", 1, identities);
  criterion(2, "MMS convergence", 120, mms);
  criterion(3, "zero propagation", 5, zero_propagation);
  criterion(4, "cold-start collapse", 30, cold_start);
  criterion(5, "eta scaling", 300, eta_scaling);
  criterion(6, "constraint residuals", 120, constraints);
  criterion(7, "charge conservation", 60, charge_conservation);
  criterion(8, "determinism", 60, determinism);
  criterion(9, "force truncation bound", 10, force_bound);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
