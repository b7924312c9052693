#include "parax/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace parax::verify {

using hierarchy::OrderInputs;
using std::numbers::pi;
using Fn3 = std::function<double(double, double, double)>;

namespace {

struct Geometry {
  double a, b, Z, x0, y0;
  explicit Geometry(const grid::Mesh& m)
      : a(m.a), b(m.b), Z(m.nz > 1 ? m.zlen : 1.0), x0(m.x0), y0(m.y0) {}
  double X(double x) const { return x - x0; }
  double Y(double y) const { return y - y0; }
  double Xc(double x) const { return x - x0 - 0.5 * a; }
  double Yc(double y) const { return y - y0 - 0.5 * b; }
};

// phi = sin(pi X/a) sin(pi Y/b) cos(kz zeta), kz = pi / (2 Z)
struct StaticMode {
  Geometry g;
  double beta, kx, ky, kz, kappa, K2;
  StaticMode(const grid::Mesh& m, double beta_)
      : g(m), beta(beta_), kx(pi / g.a), ky(pi / g.b), kz(pi / (2.0 * g.Z)),
        kappa(1.0 - beta_ * beta_), K2(kx * kx + ky * ky + kappa * kz * kz) {}
  double sx(double x) const { return std::sin(kx * g.X(x)); }
  double cx(double x) const { return std::cos(kx * g.X(x)); }
  double sy(double y) const { return std::sin(ky * g.Y(y)); }
  double cy(double y) const { return std::cos(ky * g.Y(y)); }
  double phi(double x, double y, double z) const { return sx(x) * sy(y) * std::cos(kz * z); }
  double phi_x(double x, double y, double z) const { return kx * cx(x) * sy(y) * std::cos(kz * z); }
  double phi_y(double x, double y, double z) const { return ky * sx(x) * cy(y) * std::cos(kz * z); }
  double phi_z(double x, double y, double z) const { return -kz * sx(x) * sy(y) * std::sin(kz * z); }

  FieldOrder fields(const MeshPtr& m, double amp) const {
    FieldOrder f = FieldOrder::zeros(m, 0);
    f.Ez = ScalarField(m, [&](double x, double y, double z) { return amp * kappa * phi_z(x, y, z); });
    f.Eperp.x = ScalarField(m, [&](double x, double y, double z) { return -amp * phi_x(x, y, z); });
    f.Eperp.y = ScalarField(m, [&](double x, double y, double z) { return -amp * phi_y(x, y, z); });
    f.Ecal = kappa * f.Eperp;
    f.Bperp.x = ScalarField(m, [&](double x, double y, double z) { return amp * beta * phi_y(x, y, z); });
    f.Bperp.y = ScalarField(m, [&](double x, double y, double z) { return -amp * beta * phi_x(x, y, z); });
    return f;
  }
};

void require_planar(const grid::Mesh& m, const std::string& id) {
  if (!m.planar()) throw std::invalid_argument("mms case '" + id + "' needs a planar mesh");
}
void require_volume(const grid::Mesh& m, const std::string& id) {
  if (m.planar()) throw std::invalid_argument("mms case '" + id + "' needs a volume mesh");
}

const std::vector<std::string>& ids() {
  static const std::vector<std::string> v{"zero",         "poisson-sin", "ez-mode-111",
                                          "divcurl-rot",  "divcurl-grad", "divcurl-mode",
                                          "static-mode",  "quasi-static-mode", "bz-ramp"};
  return v;
}

FieldOrder total_at(const FieldHierarchy& h, double eta) {
  FieldOrder t = FieldOrder::zeros(h.mesh, h.n_max());
  double w = 1.0;
  for (const FieldOrder& f : h.orders) {
    t.Ez.add_scaled(w, f.Ez);
    t.Bz.add_scaled(w, f.Bz);
    t.Eperp.add_scaled(w, f.Eperp);
    t.Bperp.add_scaled(w, f.Bperp);
    t.Ecal.add_scaled(w, f.Ecal);
    w *= eta;
  }
  return t;
}

FieldHierarchy truncate(const FieldHierarchy& h, int n) {
  FieldHierarchy t = h;
  t.orders.resize(n + 1);
  t.diagnostics.resize(std::min<std::size_t>(t.diagnostics.size(), n + 1));
  return t;
}

}  // namespace

std::vector<std::string> mms_case_ids() { return ids(); }

double quasi_static_amplitude(double t) { return 1.0 + t * t; }

SourceMoments quasi_static_sources(const MeshPtr& mesh, double beta, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  require_volume(*mesh, "quasi-static-mode");
  const StaticMode s(*mesh, beta);
  const double g = quasi_static_amplitude(t);
  const double rate = (g - quasi_static_amplitude(t - dt)) / dt;
  SourceMoments src = SourceMoments::zeros(mesh);
  src.rho = ScalarField(mesh, [&](double x, double y, double z) { return g * s.K2 * s.phi(x, y, z); });
  src.Jzeta = ScalarField(mesh, [&](double x, double y, double z) {
    return -rate * s.K2 * s.sx(x) * s.sy(y) * std::sin(s.kz * z) / s.kz;
  });
  return src;
}

ManufacturedSolution mms_case(const std::string& id, const MeshPtr& mesh, double beta,
                              double time, double dt) {
  if (std::find(ids().begin(), ids().end(), id) == ids().end()) {
    std::ostringstream os;
    os << "unknown mms case '" << id << "' (known:";
    for (const auto& k : ids()) os << ' ' << k;
    os << ')';
    throw std::invalid_argument(os.str());
  }
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  const grid::Mesh& m = *mesh;
  const Geometry g(m);
  const double kappa = 1.0 - beta * beta;
  ManufacturedSolution c;
  c.id = id;
  c.mesh = mesh;
  c.beta = beta;
  c.scalar_rhs = ScalarField(mesh);
  c.scalar_exact = ScalarField(mesh);
  c.div_src = ScalarField(mesh);
  c.curl_src = ScalarField(mesh);
  c.vector_exact = VectorField2(mesh);
  c.sources = {SourceMoments::zeros(mesh)};
  c.exact = FieldOrder::zeros(mesh, 0);

  if (id == "zero") return c;
  if (id == "poisson-sin") {
    require_planar(m, id);
    const double k2 = pi * pi / (g.a * g.a) + pi * pi / (g.b * g.b);
    const Fn3 u = [=](double x, double y, double) {
      return std::sin(pi * g.X(x) / g.a) * std::sin(pi * g.Y(y) / g.b);
    };
    c.scalar_exact = ScalarField(mesh, u);
    c.scalar_rhs = -k2 * c.scalar_exact;
  } else if (id == "ez-mode-111") {
    require_volume(m, id);
    const double k2 = pi * pi / (g.a * g.a) + pi * pi / (g.b * g.b) + kappa * pi * pi / (g.Z * g.Z);
    c.scalar_exact = ScalarField(mesh, [=](double x, double y, double z) {
      return std::sin(pi * g.X(x) / g.a) * std::sin(pi * g.Y(y) / g.b) * std::sin(pi * z / g.Z);
    });
    c.scalar_rhs = -k2 * c.scalar_exact;
  } else if (id == "divcurl-rot") {
    require_planar(m, id);
    c.vector_exact = VectorField2(ScalarField(mesh, [=](double, double y, double) { return -g.Yc(y); }),
                                  ScalarField(mesh, [=](double x, double, double) { return g.Xc(x); }));
    c.curl_src = ScalarField(mesh, 2.0);
  } else if (id == "divcurl-grad") {
    require_planar(m, id);
    c.vector_exact = VectorField2(ScalarField(mesh, [=](double x, double, double) { return g.Xc(x); }),
                                  ScalarField(mesh, [=](double, double y, double) { return g.Yc(y); }));
    c.div_src = ScalarField(mesh, 2.0);
  } else if (id == "divcurl-mode") {
    require_planar(m, id);
    // A = (sin(pi X) cos(Y), e^X Y^2)
    c.vector_exact = VectorField2(
        ScalarField(mesh, [=](double x, double y, double) { return std::sin(pi * g.X(x)) * std::cos(g.Y(y)); }),
        ScalarField(mesh, [=](double x, double y, double) { return std::exp(g.X(x)) * g.Y(y) * g.Y(y); }));
    c.div_src = ScalarField(mesh, [=](double x, double y, double) {
      return pi * std::cos(pi * g.X(x)) * std::cos(g.Y(y)) + 2.0 * std::exp(g.X(x)) * g.Y(y);
    });
    c.curl_src = ScalarField(mesh, [=](double x, double y, double) {
      return std::exp(g.X(x)) * g.Y(y) * g.Y(y) + std::sin(pi * g.X(x)) * std::sin(g.Y(y));
    });
  } else if (id == "static-mode") {
    require_volume(m, id);
    const StaticMode s(m, beta);
    c.sources[0].rho = ScalarField(mesh, [&](double x, double y, double z) { return s.K2 * s.phi(x, y, z); });
    c.exact = s.fields(mesh, 1.0);
  } else if (id == "quasi-static-mode") {
    c.sources[0] = quasi_static_sources(mesh, beta, time, dt);
    c.exact = StaticMode(m, beta).fields(mesh, quasi_static_amplitude(time));
  } else if (id == "bz-ramp") {
    require_volume(m, id);
    // B_perp = (sin(pi zeta/Z) X^2/2, 0), Bz = (Z/pi)(1 - cos(pi zeta/Z)) X
    c.exact.Bperp.x = ScalarField(mesh, [=](double x, double, double z) {
      return std::sin(pi * z / g.Z) * 0.5 * g.X(x) * g.X(x);
    });
    c.exact.Bz = ScalarField(mesh, [=](double x, double, double z) {
      return g.Z / pi * (1.0 - std::cos(pi * z / g.Z)) * g.X(x);
    });
  }
  return c;
}

const std::array<const char*, ResidualFields::count>& ResidualFields::names() {
  static const std::array<const char*, count> n{"ampere_perp_x", "ampere_perp_y", "ampere_z",
                                                "gauss",         "faraday_perp_x", "faraday_perp_y",
                                                "faraday_z",     "solenoidal"};
  return n;
}

double ResidualReport::combined_l2() const {
  double s = 0.0;
  for (const auto& e : equations) s += e.l2 * e.l2;
  return std::sqrt(s);
}

double ResidualReport::combined_max() const {
  double s = 0.0;
  for (const auto& e : equations) s = std::max(s, e.max);
  return s;
}

ResidualFields maxwell_residual_fields(const FieldHierarchy& h, double eta,
                                       const std::vector<SourceMoments>& sources,
                                       const FieldHistory& history) {
  if (h.orders.empty()) throw std::invalid_argument("residual of an empty hierarchy");
  if (sources.empty()) throw std::invalid_argument("residual needs the source moments");
  const MeshPtr& mesh = h.mesh;
  const double beta = h.beta, kappa = 1.0 - beta * beta;

  SourceMoments s = SourceMoments::zeros(mesh);
  double w = 1.0;
  for (const auto& src : sources) {
    s.rho.add_scaled(w, src.rho);
    s.Jperp.add_scaled(w, src.Jperp);
    s.Jzeta.add_scaled(w, src.Jzeta);
    w *= eta;
  }
  const FieldOrder F = total_at(h, eta);
  FieldOrder dF = FieldOrder::zeros(mesh, h.n_max());
  if (!history.empty()) {
    const FieldHierarchy& p = history.latest();
    if (p.n_max() < h.n_max()) throw std::invalid_argument("history snapshot has fewer orders");
    if (!(h.time > p.time)) throw std::invalid_argument("history snapshot is not earlier");
    const FieldOrder P = total_at(truncate(p, h.n_max()), eta);
    const double inv = 1.0 / (h.time - p.time);
    dF.Ez = inv * (F.Ez - P.Ez);
    dF.Bz = inv * (F.Bz - P.Bz);
    dF.Eperp = inv * (F.Eperp - P.Eperp);
    dF.Bperp = inv * (F.Bperp - P.Bperp);
  } else if (!s.Jperp.is_zero() || !s.Jzeta.is_zero()) {
    throw std::invalid_argument("residual with nonzero current needs a history snapshot");
  }

  const VectorField2 G = F.Ecal - kappa * F.Eperp;
  ResidualFields r;
  VectorField2 r1 = eta * dF.Eperp + (1.0 / beta) * grid::d_dzeta(G) -
                    grid::curl_perp_scalar(F.Bz) + eta * s.Jperp;
  r.r[0] = std::move(r1.x);
  r.r[1] = std::move(r1.y);
  r.r[2] = eta * dF.Ez + (1.0 / beta) * grid::div_perp(G) - eta * s.Jzeta;
  r.r[3] = grid::div_perp(F.Eperp) - grid::d_dzeta(F.Ez) - s.rho;
  VectorField2 r4 = eta * dF.Bperp + grid::d_dzeta(grid::cross_ez(F.Ecal)) +
                    grid::curl_perp_scalar(F.Ez);
  r.r[4] = std::move(r4.x);
  r.r[5] = std::move(r4.y);
  r.r[6] = eta * dF.Bz + grid::curl_perp_vector(F.Ecal);
  r.r[7] = grid::div_perp(F.Bperp) - grid::d_dzeta(F.Bz);
  return r;
}

ResidualReport residual_report(const ResidualFields& r, const FieldHierarchy& h, double eta) {
  ResidualReport rep;
  rep.eta = eta;
  rep.beta = h.beta;
  rep.time = h.time;
  rep.n_max = h.n_max();
  const grid::Mesh& m = r.r[0].mesh();
  rep.nx = m.nx;
  rep.ny = m.ny;
  rep.nz = m.nz;
  static const std::array<const char*, 6> names{"ampere_perp", "ampere_z", "gauss",
                                                "faraday_perp", "faraday_z", "solenoidal"};
  static const std::array<std::vector<int>, 6> parts{
      std::vector<int>{0, 1}, {2}, {3}, {4, 5}, {6}, {7}};
  for (int e = 0; e < 6; ++e) {
    rep.equations[e].name = names[e];
    double s = 0.0, mx = 0.0;
    for (int p : parts[e]) {
      const double l2 = grid::interior_l2(r.r[p]);
      s += l2 * l2;
      mx = std::max(mx, grid::interior_max(r.r[p]));
    }
    rep.equations[e].l2 = std::sqrt(s);
    rep.equations[e].max = mx;
  }
  return rep;
}

ResidualReport maxwell_residual(const FieldHierarchy& h, double eta,
                                const std::vector<SourceMoments>& sources,
                                const FieldHistory& history) {
  return residual_report(maxwell_residual_fields(h, eta, sources, history), h, eta);
}

ResidualFields richardson(const ResidualFields& fine, const ResidualFields& coarse) {
  const grid::Mesh& f = fine.r[0].mesh();
  const grid::Mesh& c = coarse.r[0].mesh();
  const bool nested = f.nx == 2 * c.nx - 1 && f.ny == 2 * c.ny - 1 &&
                      (c.nz == 1 ? f.nz == 1 : f.nz == 2 * c.nz - 1) && f.a == c.a &&
                      f.b == c.b && f.zlen == c.zlen && f.x0 == c.x0 && f.y0 == c.y0;
  if (!nested) throw std::invalid_argument("richardson: fine mesh must refine the coarse mesh by 2");
  const int sz = c.nz == 1 ? 0 : 2;
  ResidualFields out;
  for (int e = 0; e < ResidualFields::count; ++e) {
    ScalarField r(coarse.r[e].mesh_ptr());
    for (int k = 0; k < c.nz; ++k)
      for (int j = 0; j < c.ny; ++j)
        for (int i = 0; i < c.nx; ++i)
          r.at(i, j, k) = (4.0 * fine.r[e].at(2 * i, 2 * j, sz * k) - coarse.r[e].at(i, j, k)) / 3.0;
    out.r[e] = std::move(r);
  }
  return out;
}

ConvergenceReport fit_convergence(std::string target, std::string parameter_name,
                                  std::vector<double> parameter, std::vector<double> error,
                                  double target_order) {
  if (parameter.size() != error.size())
    throw std::invalid_argument("convergence fit: one error per parameter value");
  if (parameter.size() < 3) throw std::invalid_argument("convergence fit needs at least 3 points");
  const bool inc = parameter[1] > parameter[0];
  for (std::size_t i = 0; i < parameter.size(); ++i) {
    if (!(parameter[i] > 0.0)) throw std::invalid_argument("convergence fit: parameters must be positive");
    if (i > 0 && (inc ? !(parameter[i] > parameter[i - 1]) : !(parameter[i] < parameter[i - 1])))
      throw std::invalid_argument("convergence fit: parameters must be strictly monotone");
    if (!(error[i] > 0.0) || !std::isfinite(error[i]))
      throw std::invalid_argument("degenerate convergence fit: errors must be positive and finite");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(parameter.size());
  for (std::size_t i = 0; i < parameter.size(); ++i) {
    const double x = std::log(parameter[i]), y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  ConvergenceReport r;
  r.target = std::move(target);
  r.parameter_name = std::move(parameter_name);
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.parameter = std::move(parameter);
  r.error = std::move(error);
  r.target_order = target_order;
  return r;
}

std::vector<std::string> convergence_targets() {
  return {"poisson-2d", "anisotropic-3d", "divcurl-2d", "ez-order",
          "ecal-order", "eperp-order",    "bperp-order", "bz-order"};
}

namespace {

double max_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }
double max_diff(const VectorField2& a, const VectorField2& b) { return (a - b).max_abs(); }

}  // namespace

double mms_error(const std::string& target, int intervals, double beta) {
  if (intervals < 2) throw std::invalid_argument("mms_error: at least 2 intervals per axis");
  const int n = intervals + 1;
  if (target == "poisson-2d") {
    auto m = grid::build_plane_mesh(1.0, 1.0, n, n);
    const auto c = mms_case("poisson-sin", m, beta);
    const auto u = elliptic::solve_poisson_2d(c.scalar_rhs, elliptic::BoundarySpec::all(elliptic::BcKind::dirichlet));
    return max_diff(u, c.scalar_exact);
  }
  if (target == "anisotropic-3d") {
    auto m = grid::build_mesh(1.0, 1.0, 1.0, n, n, n);
    const auto c = mms_case("ez-mode-111", m, beta);
    const auto u = elliptic::solve_anisotropic_poisson_3d(
        1.0 - beta * beta, c.scalar_rhs, elliptic::BoundarySpec::all(elliptic::BcKind::dirichlet));
    return max_diff(u, c.scalar_exact);
  }
  if (target == "divcurl-2d") {
    auto m = grid::build_plane_mesh(1.0, 1.0, n, n);
    const auto c = mms_case("divcurl-mode", m, beta);
    const elliptic::DivCurlSolver s(m);
    const auto t = s.solve(c.div_src, c.curl_src, grid::boundary_tangential_trace(c.vector_exact),
                           elliptic::TraceKind::tangential, grid::plane_integral(c.curl_src));
    const auto v = s.solve(c.div_src, c.curl_src, grid::boundary_normal_trace(c.vector_exact),
                           elliptic::TraceKind::normal, grid::plane_integral(c.div_src));
    return std::max(max_diff(t, c.vector_exact), max_diff(v, c.vector_exact));
  }
  const bool hierarchy_target = target == "ez-order" || target == "ecal-order" ||
                                target == "eperp-order" || target == "bperp-order" ||
                                target == "bz-order";
  if (!hierarchy_target) throw std::invalid_argument("unknown convergence target '" + target + "'");
  auto m = grid::build_mesh(1.0, 1.0, 1.0, n, n, n);
  if (target == "bz-order") {
    const auto c = mms_case("bz-ramp", m, beta);
    auto in = hierarchy::make_order_inputs(1, c.sources, {FieldOrder::zeros(m, 0)}, 0.0, nullptr,
                                           beta, {});
    return max_diff(hierarchy::solve_Bz_order(in, c.exact.Bperp), c.exact.Bz);
  }
  const auto c = mms_case("static-mode", m, beta);
  const hierarchy::Solvers s(m, beta);
  const OrderInputs in = hierarchy::make_order_inputs(0, c.sources, {}, 0.0, nullptr, beta, {});
  const std::vector<grid::BoundaryTrace> zero_trace(m->nz, grid::BoundaryTrace::zeros(*m));
  if (target == "ez-order") return max_diff(hierarchy::solve_Ez_order(in, s), c.exact.Ez);
  if (target == "ecal-order")
    return max_diff(hierarchy::solve_Ecal_order(in, c.exact.Ez, zero_trace, s), c.exact.Ecal);
  if (target == "eperp-order")
    return max_diff(hierarchy::solve_Eperp_order(in, c.exact.Ecal, c.exact.Ez, s), c.exact.Eperp);
  return max_diff(hierarchy::solve_Bperp_order(in, c.exact.Eperp, hierarchy::bperp_normal_trace(in), s),
                  c.exact.Bperp);
}

ConvergenceReport convergence_study(const std::string& target, const std::vector<int>& intervals,
                                    double beta, double target_order) {
  std::vector<double> h, e;
  for (int n : intervals) {
    h.push_back(1.0 / n);
    e.push_back(mms_error(target, n, beta));
  }
  return fit_convergence(target, "h", std::move(h), std::move(e), target_order);
}

EtaStudy eta_scaling_study(const EtaStudyConfig& cfg) {
  if (cfg.intervals_perp % 2 || cfg.intervals_zeta % 2 || cfg.intervals_perp < 4 ||
      cfg.intervals_zeta < 4)
    throw std::invalid_argument("eta study: interval counts must be even and >= 4");
  if (cfg.n_max < 0) throw std::invalid_argument("eta study: n_max must be non-negative");
  struct Level {
    FieldHierarchy h;
    FieldHistory hist;
    SourceMoments src;
  };
  auto run = [&](int np, int nz) {
    auto m = grid::build_mesh(1.0, 1.0, 1.0, np + 1, np + 1, nz + 1);
    const hierarchy::Solvers solvers(m, cfg.beta, cfg.settings.solver);
    Level L;
    for (int step = 0; step <= 2; ++step) {
      const double t = step * cfg.dt;
      L.src = quasi_static_sources(m, cfg.beta, t, cfg.dt);
      L.h = hierarchy::solve_hierarchy(cfg.n_max, {L.src}, L.hist, t, cfg.beta, cfg.etas.front(), {},
                                       cfg.settings, &solvers);
      if (step < 2) L.hist.push(L.h);
    }
    return L;
  };
  const Level fine = run(cfg.intervals_perp, cfg.intervals_zeta);
  const Level coarse = run(cfg.intervals_perp / 2, cfg.intervals_zeta / 2);

  EtaStudy out;
  for (int n = 0; n <= cfg.n_max; ++n) {
    FieldHistory hf, hc;
    hf.push(truncate(fine.hist.latest(), n));
    hc.push(truncate(coarse.hist.latest(), n));
    const FieldHierarchy f = truncate(fine.h, n), c = truncate(coarse.h, n);
    std::vector<double> corrected, raw;
    for (double eta : cfg.etas) {
      const auto rf = maxwell_residual_fields(f, eta, {fine.src}, hf);
      const auto rc = maxwell_residual_fields(c, eta, {coarse.src}, hc);
      corrected.push_back(residual_report(richardson(rf, rc), c, eta).combined_l2());
      raw.push_back(residual_report(rf, f, eta).combined_l2());
    }
    out.fits.push_back(fit_convergence("residual n_max=" + std::to_string(n), "eta", cfg.etas,
                                       corrected, n + 0.8));
    out.raw_fine.push_back(std::move(raw));
  }
  return out;
}

}  // namespace parax::verify
