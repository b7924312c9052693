#include "parax/pic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "parax/operators.hpp"
#include "parax/parallel.hpp"

namespace parax::pic {

namespace {

constexpr std::size_t deposit_chunks = 8;

/// Portable uniform and normal draws (std distributions are implementation-defined).
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  double normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * uniform());
  }
};

struct Cell {
  int i, j, k;
  double tx, ty, tz;
};

bool inside(const Mesh& m, double x, double y, double zeta) {
  return x >= m.x0 && x <= m.x0 + m.a && y >= m.y0 && y <= m.y0 + m.b && zeta >= 0.0 &&
         zeta <= m.zlen;
}

int locate1(double u, double h, int n, double& t) {
  int i = static_cast<int>(std::floor(u / h));
  i = std::clamp(i, 0, n - 2);
  t = std::clamp(u / h - i, 0.0, 1.0);
  return i;
}

Cell locate(const Mesh& m, double x, double y, double zeta) {
  Cell c{};
  c.i = locate1(x - m.x0, m.hx, m.nx, c.tx);
  c.j = locate1(y - m.y0, m.hy, m.ny, c.ty);
  c.k = locate1(zeta, m.hz, m.nz, c.tz);
  return c;
}

template <class Fn>
void for_corners(const Mesh& m, const Cell& c, Fn&& fn) {
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di) {
        const double w = (di ? c.tx : 1.0 - c.tx) * (dj ? c.ty : 1.0 - c.ty) * (dk ? c.tz : 1.0 - c.tz);
        fn(m.index(c.i + di, c.j + dj, c.k + dk), w);
      }
}

void require_volume(const Mesh& m) {
  if (m.planar()) throw std::invalid_argument("particles need a volume mesh");
}

}  // namespace

void ParticleEnsemble::add(double px, double py, double pz, double pvx, double pvy, double pvz,
                           double w) {
  id.push_back(id.empty() ? 0 : id.back() + 1);
  x.push_back(px);
  y.push_back(py);
  zeta.push_back(pz);
  vx.push_back(pvx);
  vy.push_back(pvy);
  vzeta.push_back(pvz);
  weight.push_back(w);
}

double ParticleEnsemble::total_weight() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

void ParticleEnsemble::validate() const {
  const std::size_t n = x.size();
  if (id.size() != n || y.size() != n || zeta.size() != n || vx.size() != n || vy.size() != n ||
      vzeta.size() != n || weight.size() != n)
    throw std::invalid_argument("particle arrays differ in length");
  for (double w : weight)
    if (!(w > 0.0)) throw std::invalid_argument("particle weights must be positive");
}

std::size_t ParticleEnsemble::absorb_outside(const Mesh& m) {
  std::size_t out = 0;
  for (std::size_t p = 0; p < x.size(); ++p) {
    if (!inside(m, x[p], y[p], zeta[p])) continue;
    id[out] = id[p];
    x[out] = x[p];
    y[out] = y[p];
    zeta[out] = zeta[p];
    vx[out] = vx[p];
    vy[out] = vy[p];
    vzeta[out] = vzeta[p];
    weight[out] = weight[p];
    ++out;
  }
  const std::size_t removed = x.size() - out;
  for (auto* v : {&x, &y, &zeta, &vx, &vy, &vzeta, &weight}) v->resize(out);
  id.resize(out);
  absorbed += removed;
  return removed;
}

void ParticleEnsemble::write_csv(std::ostream& os) const {
  os << "id,x,y,zeta,vx,vy,vzeta,weight\n";
  os << std::setprecision(17);
  for (std::size_t p = 0; p < size(); ++p)
    os << id[p] << ',' << x[p] << ',' << y[p] << ',' << zeta[p] << ',' << vx[p] << ',' << vy[p]
       << ',' << vzeta[p] << ',' << weight[p] << '\n';
}

Family parse_family(const std::string& s) {
  if (s == "uniform_ellipse" || s == "uniform") return Family::uniform_ellipse;
  if (s == "gaussian") return Family::gaussian;
  if (s == "cold_beam" || s == "cold") return Family::cold_beam;
  throw std::invalid_argument("unsupported particle family '" + s +
                              "' (uniform_ellipse, gaussian, cold_beam)");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::uniform_ellipse: return "uniform_ellipse";
    case Family::gaussian: return "gaussian";
    case Family::cold_beam: return "cold_beam";
  }
  return "unknown";
}

void SamplingConfig::validate(const Mesh& m) const {
  require_volume(m);
  if (count == 0) throw std::invalid_argument("sampling: zero particles");
  if (!(total_charge > 0.0)) throw std::invalid_argument("sampling: total_charge must be positive");
  if (!(rx > 0.0 && ry > 0.0)) throw std::invalid_argument("sampling: rx and ry must be positive");
  if (!(v_sigma_perp >= 0.0 && v_sigma_zeta >= 0.0))
    throw std::invalid_argument("sampling: velocity spreads must be non-negative");
  const double x = std::isnan(cx) ? m.x0 + 0.5 * m.a : cx;
  const double y = std::isnan(cy) ? m.y0 + 0.5 * m.b : cy;
  if (!inside(m, x, y, 0.0)) throw std::invalid_argument("sampling: centre outside the pipe");
  if (family == Family::gaussian) {
    if (!(zeta_sigma > 0.0)) throw std::invalid_argument("sampling: zeta_sigma must be positive");
    if (!(zeta_mean > 0.0 && zeta_mean < m.zlen))
      throw std::invalid_argument("sampling: zeta_mean outside (0, Z)");
  } else {
    if (x - rx < m.x0 || x + rx > m.x0 + m.a || y - ry < m.y0 || y + ry > m.y0 + m.b)
      throw std::invalid_argument("sampling: ellipse exceeds the pipe cross-section");
    if (!(zeta_lo >= 0.0 && zeta_hi <= m.zlen && zeta_lo < zeta_hi))
      throw std::invalid_argument("sampling: need 0 <= zeta_lo < zeta_hi <= Z");
  }
}

ParticleEnsemble sample_initial_distribution(const SamplingConfig& cfg, const Mesh& m) {
  cfg.validate(m);
  Rng rng(cfg.seed);
  const double cx = std::isnan(cfg.cx) ? m.x0 + 0.5 * m.a : cfg.cx;
  const double cy = std::isnan(cfg.cy) ? m.y0 + 0.5 * m.b : cfg.cy;
  const double w = cfg.total_charge / static_cast<double>(cfg.count);
  ParticleEnsemble p;
  for (std::size_t n = 0; n < cfg.count; ++n) {
    double x, y, z;
    if (cfg.family == Family::gaussian) {
      do x = cx + cfg.rx * rng.normal();
      while (!(x > m.x0 && x < m.x0 + m.a));
      do y = cy + cfg.ry * rng.normal();
      while (!(y > m.y0 && y < m.y0 + m.b));
      do z = cfg.zeta_mean + cfg.zeta_sigma * rng.normal();
      while (!(z > 0.0 && z < m.zlen));
    } else {
      const double r = std::sqrt(rng.uniform()), th = 2.0 * std::numbers::pi * rng.uniform();
      x = cx + cfg.rx * r * std::cos(th);
      y = cy + cfg.ry * r * std::sin(th);
      z = cfg.zeta_lo + (cfg.zeta_hi - cfg.zeta_lo) * rng.uniform();
    }
    double vx = cfg.v_mean[0], vy = cfg.v_mean[1], vz = cfg.v_mean[2];
    if (cfg.family != Family::cold_beam) {
      if (cfg.v_sigma_perp > 0.0) {
        vx += cfg.v_sigma_perp * rng.normal();
        vy += cfg.v_sigma_perp * rng.normal();
      }
      if (cfg.v_sigma_zeta > 0.0) vz += cfg.v_sigma_zeta * rng.normal();
    }
    p.add(x, y, z, vx, vy, vz, w);
  }
  return p;
}

SourceMoments deposit_sources(const ParticleEnsemble& p, const MeshPtr& mesh, double charge,
                              int threads, DepositReport* report) {
  const Mesh& m = *mesh;
  require_volume(m);
  p.validate();
  const std::size_t n = p.size(), nodes = m.size();
  std::vector<std::array<std::vector<double>, 4>> buf(deposit_chunks);
  std::vector<std::size_t> skipped(deposit_chunks, 0);
  parallel_for(
      deposit_chunks,
      [&](std::size_t c) {
        auto& b = buf[c];
        for (auto& v : b) v.assign(nodes, 0.0);
        const std::size_t lo = c * n / deposit_chunks, hi = (c + 1) * n / deposit_chunks;
        for (std::size_t q = lo; q < hi; ++q) {
          if (!inside(m, p.x[q], p.y[q], p.zeta[q])) {
            ++skipped[c];
            continue;
          }
          const Cell cell = locate(m, p.x[q], p.y[q], p.zeta[q]);
          const double w = p.weight[q];
          for_corners(m, cell, [&](std::size_t node, double s) {
            const double ws = w * s;
            b[0][node] += ws;
            b[1][node] += ws * p.vx[q];
            b[2][node] += ws * p.vy[q];
            b[3][node] += ws * p.vzeta[q];
          });
        }
      },
      threads);
  SourceMoments s = SourceMoments::zeros(mesh);
  std::array<std::vector<double>*, 4> out{&s.rho.data(), &s.Jperp.x.data(), &s.Jperp.y.data(),
                                          &s.Jzeta.data()};
  for (std::size_t c = 0; c < deposit_chunks; ++c)
    for (int f = 0; f < 4; ++f)
      for (std::size_t node = 0; node < nodes; ++node) (*out[f])[node] += buf[c][f][node];
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        const std::size_t node = m.index(i, j, k);
        const double inv = charge / grid::node_weight(m, i, j, k);
        for (auto* f : out) (*f)[node] *= inv;
      }
  if (report) {
    report->skipped = 0;
    for (auto v : skipped) report->skipped += v;
  }
  return s;
}

double interpolate(const grid::ScalarField& f, double x, double y, double zeta) {
  const Mesh& m = f.mesh();
  require_volume(m);
  const Cell c = locate(m, x, y, zeta);
  double v = 0.0;
  for_corners(m, c, [&](std::size_t node, double w) { v += w * f[node]; });
  return v;
}

ForceSample assemble_force(int n, const FieldHierarchy& h, double x, double y, double zeta,
                           double vx, double vy, double vzeta) {
  if (n < 0 || n > h.n_max())
    throw std::out_of_range("force of order " + std::to_string(n) + " requested but hierarchy has " +
                            std::to_string(h.n_max() + 1) + " orders");
  const Mesh& m = *h.mesh;
  const Cell c = locate(m, x, y, zeta);
  auto at = [&](const grid::ScalarField& f) {
    double v = 0.0;
    for_corners(m, c, [&](std::size_t node, double w) { v += w * f[node]; });
    return v;
  };
  ForceSample s;
  double w = 1.0;
  for (int i = 0; i <= n; ++i) {
    const auto& f = h.orders[i];
    double fx = at(f.Ecal.x), fy = at(f.Ecal.y), fz = at(f.Ez);
    if (i >= 1) {
      const auto& g = h.orders[i - 1];
      const double bz = at(g.Bz), bx = at(g.Bperp.x), by = at(g.Bperp.y);
      // (a) x e_z = (a_y, -a_x)
      const double ax = bz * vx + vzeta * bx, ay = bz * vy + vzeta * by;
      fx += ay;
      fy -= ax;
      fz += vx * by - vy * bx;
    }
    s.Fperp.push_back({fx, fy});
    s.Fz.push_back(fz);
    s.total_perp[0] += w * fx;
    s.total_perp[1] += w * fy;
    s.total_z += w * fz;
    w *= h.eta;
  }
  return s;
}

ForceEvaluator hierarchy_force(const FieldHierarchy& h, int n) {
  if (n < 0 || n > h.n_max()) throw std::out_of_range("force order not available");
  return [&h, n](const ParticleEnsemble& p, std::size_t i) {
    const ForceSample s = assemble_force(n, h, p.x[i], p.y[i], p.zeta[i], p.vx[i], p.vy[i], p.vzeta[i]);
    return std::array<double, 3>{s.total_perp[0], s.total_perp[1], s.total_z};
  };
}

void kick(ParticleEnsemble& p, const ForceEvaluator& force, double dt, int threads) {
  const std::size_t n = p.size();
  std::vector<std::array<double, 3>> f(n);
  parallel_for(n, [&](std::size_t i) { f[i] = force(p, i); }, threads);
  const double h = 0.5 * dt;
  for (std::size_t i = 0; i < n; ++i) {
    p.vx[i] += f[i][0] * h;
    p.vy[i] += f[i][1] * h;
    p.vzeta[i] -= f[i][2] * h;
  }
}

std::size_t drift(ParticleEnsemble& p, const Mesh& m, double dt) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    p.x[i] += p.vx[i] * dt;
    p.y[i] += p.vy[i] * dt;
    p.zeta[i] += p.vzeta[i] * dt;
  }
  return p.absorb_outside(m);
}

std::size_t push_particles(ParticleEnsemble& p, const ForceEvaluator& force, const Mesh& m,
                           double dt, int threads) {
  if (!(dt > 0.0)) throw std::invalid_argument("push: dt must be positive");
  kick(p, force, dt, threads);
  const std::size_t gone = drift(p, m, dt);
  kick(p, force, dt, threads);
  return gone;
}

double check_charge_conservation(const std::vector<SourceMoments>& history, double dt) {
  if (history.size() < 2) throw std::invalid_argument("charge conservation needs two snapshots");
  if (!(dt > 0.0)) throw std::invalid_argument("charge conservation: dt must be positive");
  const SourceMoments& a = history[history.size() - 2];
  const SourceMoments& b = history.back();
  if (!a.rho.mesh().same_grid(b.rho.mesh()))
    throw std::invalid_argument("charge conservation: snapshots on different meshes");
  const grid::ScalarField r = (1.0 / dt) * (b.rho - a.rho) + grid::div_perp(b.Jperp) +
                              grid::d_dzeta(b.Jzeta);
  return grid::interior_max(r);
}

void PicConfig::validate() const {
  if (!mesh) throw std::invalid_argument("pic: mesh missing");
  require_volume(*mesh);
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("pic: beta must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("pic: eta must lie in (0, 1)");
  if (n_max < 0) throw std::invalid_argument("pic: n_max must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("pic: dt must be positive");
  if (steps < 0) throw std::invalid_argument("pic: steps must be non-negative");
  if (!std::isfinite(charge)) throw std::invalid_argument("pic: charge must be finite");
  settings.validate();
  sampling.validate(*mesh);
}

namespace {

StepDiagnostics diagnose(int step, double time, const ParticleEnsemble& p, const FieldHierarchy& h,
                         const Mesh& m) {
  StepDiagnostics d;
  d.step = step;
  d.time = time;
  d.alive = p.size();
  d.absorbed = p.absorbed;
  d.total_weight = p.total_weight();
  const double cx = m.x0 + 0.5 * m.a, cy = m.y0 + 0.5 * m.b;
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    s += p.weight[i] * ((p.x[i] - cx) * (p.x[i] - cx) + (p.y[i] - cy) * (p.y[i] - cy));
  d.rms_radius = d.total_weight > 0.0 ? std::sqrt(s / d.total_weight) : 0.0;
  for (const auto& f : h.orders)
    d.norms.push_back({f.Ez.max_abs(), f.Bz.max_abs(), f.Eperp.max_abs(), f.Bperp.max_abs(),
                       f.Ecal.max_abs()});
  for (const auto& g : h.diagnostics) d.fixed_point_iterations.push_back(g.fixed_point_iterations);
  return d;
}

SourceMoments averaged_current(SourceMoments now, const SourceMoments& before) {
  now.Jperp = 0.5 * (now.Jperp + before.Jperp);
  now.Jzeta = 0.5 * (now.Jzeta + before.Jzeta);
  return now;
}

}  // namespace

std::vector<StepDiagnostics> run_pic(const PicConfig& cfg,
                                     const std::function<void(const StepRecord&)>& observer) {
  cfg.validate();
  const Mesh& m = *cfg.mesh;
  const int threads = cfg.settings.threads;
  const hierarchy::Solvers solvers(cfg.mesh, cfg.beta, cfg.settings.solver);
  std::vector<StepDiagnostics> out;
  int step = 0;
  try {
    ParticleEnsemble p = sample_initial_distribution(cfg.sampling, m);
    hierarchy::FieldHistory history;
    SourceMoments src = deposit_sources(p, cfg.mesh, cfg.charge, threads);
    FieldHierarchy h = hierarchy::solve_hierarchy(cfg.n_max, {src}, history, 0.0, cfg.beta, cfg.eta,
                                                  cfg.Be, cfg.settings, &solvers);
    out.push_back(diagnose(0, 0.0, p, h, m));
    if (observer) observer({out.back(), h, p, src});
    for (step = 1; step <= cfg.steps; ++step) {
      const double t = step * cfg.dt;
      kick(p, hierarchy_force(h, cfg.n_max), cfg.dt, threads);
      const SourceMoments before = deposit_sources(p, cfg.mesh, cfg.charge, threads);
      drift(p, m, cfg.dt);
      SourceMoments next =
          averaged_current(deposit_sources(p, cfg.mesh, cfg.charge, threads), before);
      history.push(std::move(h));
      h = hierarchy::solve_hierarchy(cfg.n_max, {next}, history, t, cfg.beta, cfg.eta, cfg.Be,
                                     cfg.settings, &solvers);
      kick(p, hierarchy_force(h, cfg.n_max), cfg.dt, threads);
      StepDiagnostics d = diagnose(step, t, p, h, m);
      d.charge_residual = check_charge_conservation({src, next}, cfg.dt);
      src = std::move(next);
      out.push_back(std::move(d));
      if (observer) observer({out.back(), h, p, src});
    }
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "pic step " << step << ": " << e.what();
    throw std::runtime_error(os.str());
  }
  return out;
}

}  // namespace parax::pic
