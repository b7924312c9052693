#include "parax/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parax/parallel.hpp"

namespace parax::hierarchy {

using elliptic::BcKind;
using elliptic::BoundarySpec;
using elliptic::Face;
using grid::BoundaryTrace;
using grid::Side;

SourceMoments SourceMoments::zeros(const MeshPtr& mesh) {
  return {ScalarField(mesh), VectorField2(mesh), ScalarField(mesh)};
}

FieldOrder FieldOrder::zeros(const MeshPtr& mesh, int n) {
  FieldOrder f;
  f.n = n;
  f.Ez = ScalarField(mesh);
  f.Bz = ScalarField(mesh);
  f.Eperp = VectorField2(mesh);
  f.Bperp = VectorField2(mesh);
  f.Ecal = VectorField2(mesh);
  return f;
}

bool FieldOrder::is_zero() const {
  return Ez.is_zero() && Bz.is_zero() && Eperp.is_zero() && Bperp.is_zero() && Ecal.is_zero();
}

void HierarchySettings::validate() const {
  solver.validate();
  if (!(tolerance > 0.0)) throw std::invalid_argument("fixed-point tolerance must be positive");
  if (max_fixed_point < 1) throw std::invalid_argument("max_fixed_point must be >= 1");
}

const FieldOrder& FieldHierarchy::order(int n) const {
  if (n < 0 || n >= static_cast<int>(orders.size()))
    throw std::out_of_range("hierarchy order " + std::to_string(n) + " not available");
  return orders[n];
}

FieldOrder FieldHierarchy::total(int n) const {
  if (orders.empty()) throw std::out_of_range("empty hierarchy");
  if (n < 0) n = n_max();
  order(n);
  FieldOrder t = FieldOrder::zeros(mesh, n);
  double w = 1.0;
  for (int i = 0; i <= n; ++i, w *= eta) {
    const FieldOrder& f = orders[i];
    t.Ez.add_scaled(w, f.Ez);
    t.Bz.add_scaled(w, f.Bz);
    t.Eperp.add_scaled(w, f.Eperp);
    t.Bperp.add_scaled(w, f.Bperp);
    t.Ecal.add_scaled(w, f.Ecal);
  }
  return t;
}

const ScalarField& component(const FieldOrder& f, Component c) {
  switch (c) {
    case Component::Ez: return f.Ez;
    case Component::Bz: return f.Bz;
    case Component::Ex: return f.Eperp.x;
    case Component::Ey: return f.Eperp.y;
    case Component::Bx: return f.Bperp.x;
    case Component::By: return f.Bperp.y;
    case Component::Ecal_x: return f.Ecal.x;
    case Component::Ecal_y: return f.Ecal.y;
  }
  return f.Ez;
}

FieldHistory::FieldHistory(std::size_t depth) : depth_(depth) {
  if (depth < 2) throw std::invalid_argument("history depth must be at least 2");
}

void FieldHistory::push(FieldHierarchy h) {
  if (!snaps_.empty() && !(h.time > snaps_.back().time))
    throw std::invalid_argument("history times must increase strictly");
  snaps_.push_back(std::move(h));
  while (snaps_.size() > depth_) snaps_.pop_front();
}

const FieldHierarchy& FieldHistory::latest() const {
  if (snaps_.empty()) throw std::out_of_range("empty field history");
  return snaps_.back();
}

ScalarField FieldHistory::time_derivative(int order, Component c) const {
  const FieldHierarchy& cur = latest();
  const ScalarField& fk = component(cur.order(order), c);
  if (snaps_.size() < 2) return ScalarField(fk.mesh_ptr());
  const FieldHierarchy& prev = snaps_[snaps_.size() - 2];
  ScalarField d = fk - component(prev.order(order), c);
  d *= 1.0 / (cur.time - prev.time);
  return d;
}

Solvers::Solvers(MeshPtr mesh, double beta, elliptic::SolverSettings settings)
    : mesh_(mesh),
      plane_(grid::plane_of(*mesh)),
      beta_(beta),
      ez_(mesh, 1.0 - beta * beta,
          {BcKind::dirichlet, BcKind::dirichlet, BcKind::dirichlet, BcKind::dirichlet,
           BcKind::dirichlet, BcKind::neumann},
          settings),
      ex_(mesh, 1.0 - beta * beta,
          {BcKind::neumann, BcKind::neumann, BcKind::dirichlet, BcKind::dirichlet, BcKind::neumann,
           BcKind::neumann},
          settings),
      ey_(mesh, 1.0 - beta * beta,
          {BcKind::dirichlet, BcKind::dirichlet, BcKind::neumann, BcKind::neumann, BcKind::neumann,
           BcKind::neumann},
          settings),
      divcurl_(plane_, settings) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (mesh->planar()) throw std::invalid_argument("the hierarchy needs a volume mesh");
}

namespace {

void require_mesh(const ScalarField& f, const MeshPtr& m, const char* what) {
  if (f.empty() || !f.mesh().same_grid(*m))
    throw std::invalid_argument(std::string(what) + ": field is not on the hierarchy mesh");
}

void merge(OrderDiagnostics* d, const elliptic::SolveReport& r) {
  if (!d) return;
  d->solver_iterations += r.iterations;
  d->max_solver_residual = std::max(d->max_solver_residual, r.relative_residual);
}

double trace_diff(const std::vector<BoundaryTrace>& a, const std::vector<BoundaryTrace>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (int s = 0; s < 4; ++s)
      for (std::size_t n = 0; n < a[k].side[s].size(); ++n)
        d = std::max(d, std::abs(a[k].side[s][n] - b[k].side[s][n]));
  return d;
}

double trace_max(const std::vector<BoundaryTrace>& a) {
  double d = 0.0;
  for (const auto& t : a) d = std::max(d, t.max_abs());
  return d;
}

std::vector<BoundaryTrace> normal_traces(const VectorField2& b) {
  std::vector<BoundaryTrace> t(b.mesh().nz);
  for (int k = 0; k < b.mesh().nz; ++k) t[k] = grid::boundary_normal_trace(b, k);
  return t;
}

}  // namespace

OrderInputs make_order_inputs(int n, const std::vector<SourceMoments>& sources,
                              const std::vector<FieldOrder>& current, double time,
                              const FieldHierarchy* previous, double beta,
                              const ExternalField& Be, int threads) {
  if (n < 0) throw std::invalid_argument("order must be non-negative");
  if (sources.empty()) throw std::invalid_argument("sources for order 0 are required");
  if (static_cast<int>(current.size()) < n)
    throw std::invalid_argument("lower orders must be complete before order " + std::to_string(n));
  const MeshPtr& mesh = sources.front().rho.mesh_ptr();
  OrderInputs in;
  in.n = n;
  in.beta = beta;
  in.threads = threads;
  const auto pick = [&](int order) -> const SourceMoments* {
    return order >= 0 && order < static_cast<int>(sources.size()) ? &sources[order] : nullptr;
  };
  if (const auto* s = pick(n)) {
    require_mesh(s->rho, mesh, "rho");
    in.rho = s->rho;
  } else {
    in.rho = ScalarField(mesh);
  }
  if (const auto* s = pick(n - 1)) {
    require_mesh(s->Jzeta, mesh, "J_zeta");
    require_mesh(s->Jperp.x, mesh, "J_perp");
    in.Jperp = s->Jperp;
    in.Jzeta = s->Jzeta;
  } else {
    in.Jperp = VectorField2(mesh);
    in.Jzeta = ScalarField(mesh);
  }
  if (n == 0) {
    in.lower = FieldOrder::zeros(mesh, -1);
    in.rate = FieldOrder::zeros(mesh, -1);
    in.Be = Be;
    return in;
  }
  in.lower = current[n - 1];
  in.rate = FieldOrder::zeros(mesh, n - 1);
  if (previous) {
    if (!(time > previous->time)) throw std::invalid_argument("snapshot times must increase");
    const FieldOrder& p = previous->order(n - 1);
    const double inv = 1.0 / (time - previous->time);
    in.rate.Ez = inv * (in.lower.Ez - p.Ez);
    in.rate.Bz = inv * (in.lower.Bz - p.Bz);
    in.rate.Eperp = inv * (in.lower.Eperp - p.Eperp);
    in.rate.Bperp = inv * (in.lower.Bperp - p.Bperp);
    in.rate.Ecal = inv * (in.lower.Ecal - p.Ecal);
  }
  return in;
}

std::vector<BoundaryTrace> bperp_normal_trace(const OrderInputs& in) {
  const grid::Mesh& m = *in.mesh_ptr();
  std::vector<BoundaryTrace> t(m.nz, BoundaryTrace::zeros(m));
  for (Side s : grid::all_sides) {
    const auto nu = m.side_normal(s);
    const double b0 = in.Be.bx * nu[0] + in.Be.by * nu[1];
    std::fill(t[0][s].begin(), t[0][s].end(), b0);
  }
  if (in.rate.Bperp.is_zero()) {
    for (int k = 1; k < m.nz; ++k) t[k] = t[0];
    return t;
  }
  const double c = m.hz / (2.0 * in.beta);
  BoundaryTrace r_prev = grid::boundary_normal_trace(in.rate.Bperp, 0);
  for (int k = 1; k < m.nz; ++k) {
    BoundaryTrace r = grid::boundary_normal_trace(in.rate.Bperp, k);
    for (int s = 0; s < 4; ++s)
      for (std::size_t j = 0; j < r.side[s].size(); ++j)
        t[k].side[s][j] = t[k - 1].side[s][j] - c * (r_prev.side[s][j] + r.side[s][j]);
    r_prev = std::move(r);
  }
  return t;
}

ScalarField solve_Ez_order(const OrderInputs& in, const Solvers& s, OrderDiagnostics* diag) {
  const double beta = in.beta, kappa = in.kappa();
  ScalarField rhs = beta * grid::d_dzeta4(in.rate.Ez) + grid::curl_perp_vector4(in.rate.Bperp);
  rhs -= grid::d_dzeta4(beta * in.Jzeta + kappa * in.rho);
  BoundarySpec bc;
  bc.kind = {BcKind::dirichlet, BcKind::dirichlet, BcKind::dirichlet,
             BcKind::dirichlet, BcKind::dirichlet, BcKind::neumann};
  elliptic::SolveReport rep;
  ScalarField ez = s.ez().solve(rhs, bc, &rep);
  merge(diag, rep);
  return ez;
}

VectorField2 solve_Ecal_order(const OrderInputs& in, const ScalarField& Ez,
                              const std::vector<BoundaryTrace>& bperp_nu, const Solvers& s,
                              OrderDiagnostics* diag) {
  const grid::Mesh& m = s.mesh();
  if (static_cast<int>(bperp_nu.size()) != m.nz)
    throw std::invalid_argument("Ecal: one boundary trace per plane required");
  const double beta = in.beta, kappa = in.kappa();
  ScalarField div = kappa * (grid::d_dzeta4(Ez) + in.rho);
  div.add_scaled(beta, in.Jzeta - in.rate.Ez);
  const ScalarField curl = -1.0 * in.rate.Bz;

  VectorField2 out(s.mesh_ptr());
  std::vector<elliptic::DivCurlReport> reps(m.nz);
  parallel_for(
      m.nz,
      [&](std::size_t k) {
        const int kk = static_cast<int>(k);
        const ScalarField dk = div.slice(kk, s.plane()), ck = curl.slice(kk, s.plane());
        BoundaryTrace data = bperp_nu[k];
        for (auto& side : data.side)
          for (double& v : side) v *= beta;
        out.set_slice(kk, s.divcurl().solve(dk, ck, data, elliptic::TraceKind::tangential,
                                            grid::plane_integral(ck), &reps[k]));
      },
      in.threads);
  for (const auto& r : reps) {
    merge(diag, r.x);
    merge(diag, r.y);
    if (diag) diag->circulation_defect = std::max(diag->circulation_defect, r.trace_defect);
  }
  return out;
}

VectorField2 solve_Eperp_order(const OrderInputs& in, const VectorField2& Ecal,
                               const ScalarField& Ez, const Solvers& s, OrderDiagnostics* diag) {
  const double beta = in.beta, kappa = in.kappa();
  const ScalarField D = grid::d_dzeta4(Ez) + in.rho;
  const VectorField2 drive = in.rate.Eperp + in.Jperp;
  VectorField2 rhs = grid::grad_perp4(D) + grid::d2_dzeta2(Ecal) +
                     grid::curl_perp_scalar4(in.rate.Bz) + beta * grid::d_dzeta4(drive);
  VectorField2 N = grid::cross_ez(in.rate.Bperp) - grid::grad_perp4(Ez);
  N.add_scaled(beta, drive);
  N *= 1.0 / kappa;

  const auto neg = [](const ScalarField& f) { return (-1.0 * f).data(); };
  BoundarySpec bx;
  bx.kind = {BcKind::neumann, BcKind::neumann, BcKind::dirichlet,
             BcKind::dirichlet, BcKind::neumann, BcKind::neumann};
  bx.values[static_cast<int>(Face::x_lo)] = neg(D);
  bx.values[static_cast<int>(Face::x_hi)] = D.data();
  bx.values[static_cast<int>(Face::zeta_lo)] = neg(N.x);
  bx.values[static_cast<int>(Face::zeta_hi)] = N.x.data();
  BoundarySpec by;
  by.kind = {BcKind::dirichlet, BcKind::dirichlet, BcKind::neumann,
             BcKind::neumann, BcKind::neumann, BcKind::neumann};
  by.values[static_cast<int>(Face::y_lo)] = neg(D);
  by.values[static_cast<int>(Face::y_hi)] = D.data();
  by.values[static_cast<int>(Face::zeta_lo)] = neg(N.y);
  by.values[static_cast<int>(Face::zeta_hi)] = N.y.data();

  elliptic::SolveReport rx, ry;
  VectorField2 e(s.ex().solve(rhs.x, bx, &rx), s.ey().solve(rhs.y, by, &ry));
  merge(diag, rx);
  merge(diag, ry);
  return e;
}

VectorField2 solve_Bperp_order(const OrderInputs& in, const VectorField2& Eperp,
                               const std::vector<BoundaryTrace>& bperp_nu, const Solvers& s,
                               OrderDiagnostics* diag) {
  const grid::Mesh& m = s.mesh();
  if (static_cast<int>(bperp_nu.size()) != m.nz)
    throw std::invalid_argument("B_perp: one boundary trace per plane required");
  const double beta = in.beta;
  ScalarField curl = in.rate.Ez + beta * grid::div_perp4(Eperp) - in.Jzeta;
  ScalarField div = (-1.0 / beta) * (grid::curl_perp_vector4(Eperp) + in.rate.Bz);

  VectorField2 out(s.mesh_ptr());
  std::vector<elliptic::DivCurlReport> reps(m.nz);
  parallel_for(
      m.nz,
      [&](std::size_t k) {
        const int kk = static_cast<int>(k);
        const ScalarField dk = div.slice(kk, s.plane()), ck = curl.slice(kk, s.plane());
        out.set_slice(kk, s.divcurl().solve(dk, ck, bperp_nu[k], elliptic::TraceKind::normal,
                                            grid::plane_integral(dk), &reps[k]));
      },
      in.threads);
  for (const auto& r : reps) {
    merge(diag, r.x);
    merge(diag, r.y);
    if (diag) diag->flux_defect = std::max(diag->flux_defect, r.trace_defect);
  }
  return out;
}

ScalarField solve_Bz_order(const OrderInputs& in, const VectorField2& Bperp,
                           OrderDiagnostics* diag) {
  const grid::Mesh& m = Bperp.mesh();
  const ScalarField d = grid::div_perp4(Bperp);
  ScalarField bz(Bperp.mesh_ptr());
  const std::size_t np = m.plane_size();
  for (std::size_t p = 0; p < np; ++p) bz[p] = in.n == 0 ? in.Be.bz : 0.0;
  for (int k = 1; k < m.nz; ++k)
    for (std::size_t p = 0; p < np; ++p)
      bz[k * np + p] = bz[(k - 1) * np + p] + 0.5 * m.hz * (d[(k - 1) * np + p] + d[k * np + p]);
  if (diag) {
    double worst = 0.0;
    for (int k = 0; k < m.nz; ++k) {
      double a = 0.0, b = 0.0;
      for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
          const double w = grid::node_weight(m, i, j);
          a += w * d.at(i, j, k);
          b += w * in.rate.Bz.at(i, j, k);
        }
      worst = std::max(worst, std::abs(a + b / in.beta));
    }
    diag->bz_constraint_residual = worst;
  }
  return bz;
}

void evaluate_constraints(const OrderInputs& in, const FieldOrder& f, OrderDiagnostics& diag) {
  diag.gauss_residual =
      grid::interior_max(grid::div_perp4(f.Eperp) - grid::d_dzeta4(f.Ez) - in.rho);
  diag.solenoidal_residual = grid::interior_max(grid::div_perp4(f.Bperp) - grid::d_dzeta4(f.Bz));
  const VectorField2 pseudo = f.Ecal - (f.Eperp - in.beta * grid::cross_ez(f.Bperp));
  diag.pseudo_field_residual =
      std::max(grid::interior_max(pseudo.x), grid::interior_max(pseudo.y));
}

FieldHierarchy solve_hierarchy(int n_max, const std::vector<SourceMoments>& sources,
                               const FieldHistory& history, double time, double beta, double eta,
                               const ExternalField& Be, const HierarchySettings& settings,
                               const Solvers* cache) {
  settings.validate();
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (sources.empty()) throw std::invalid_argument("sources for order 0 are required");
  const MeshPtr mesh = sources.front().rho.mesh_ptr();
  require_mesh(sources.front().rho, mesh, "rho");
  const FieldHierarchy* previous = history.empty() ? nullptr : &history.latest();
  if (previous) {
    if (!(time > previous->time))
      throw std::invalid_argument("solve time must exceed the latest history time");
    if (!previous->mesh->same_grid(*mesh))
      throw std::invalid_argument("history snapshot lives on a different mesh");
  }
  std::unique_ptr<Solvers> local;
  if (cache) {
    if (!cache->mesh().same_grid(*mesh) || cache->beta() != beta)
      throw std::invalid_argument("solver cache does not match mesh or beta");
  } else {
    local = std::make_unique<Solvers>(mesh, beta, settings.solver);
    cache = local.get();
  }
  const Solvers& s = *cache;

  FieldHierarchy h;
  h.mesh = mesh;
  h.beta = beta;
  h.eta = eta;
  h.time = time;
  h.Be = Be;
  for (int n = 0; n <= n_max; ++n) {
    OrderDiagnostics diag;
    diag.n = n;
    const OrderInputs in =
        make_order_inputs(n, sources, h.orders, time, previous, beta, Be, settings.threads);
    FieldOrder f = FieldOrder::zeros(mesh, n);
    f.Ez = solve_Ez_order(in, s, &diag);
    const std::vector<BoundaryTrace> nu_trace = bperp_normal_trace(in);

    std::vector<BoundaryTrace> guess;
    if (previous && previous->n_max() >= n) guess = normal_traces(previous->order(n).Bperp);
    else guess.assign(mesh->nz, BoundaryTrace::zeros(*mesh));
    bool converged = false;
    for (int sweep = 1; sweep <= settings.max_fixed_point; ++sweep) {
      f.Ecal = solve_Ecal_order(in, f.Ez, guess, s, &diag);
      f.Eperp = solve_Eperp_order(in, f.Ecal, f.Ez, s, &diag);
      f.Bperp = solve_Bperp_order(in, f.Eperp, nu_trace, s, &diag);
      std::vector<BoundaryTrace> next = normal_traces(f.Bperp);
      const double diff = trace_diff(next, guess);
      diag.trace_history.push_back(diff);
      diag.fixed_point_iterations = sweep;
      guess = std::move(next);
      if (diff <= settings.tolerance * std::max(1.0, trace_max(guess))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "fixed-point loop of order " << n << " did not converge in "
         << settings.max_fixed_point << " sweeps (last trace change "
         << diag.trace_history.back() << ")";
      throw FixedPointError(os.str(), diag.trace_history);
    }
    f.Bz = solve_Bz_order(in, f.Bperp, &diag);
    evaluate_constraints(in, f, diag);
    h.orders.push_back(std::move(f));
    h.diagnostics.push_back(std::move(diag));
  }
  return h;
}

}  // namespace parax::hierarchy
