#include "parax/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace parax::elliptic {

using grid::Mesh;
using grid::MeshPtr;
using grid::ScalarField;
using grid::VectorField2;

namespace {

// Unknown counts at or above this go to conjugate gradients.
constexpr std::size_t direct_limit = 64 * 64;

struct AxisStencil {
  int n = 1;
  double h = 1.0;
  double c = 0.0;  // coefficient / h^2
  BcKind lo = BcKind::dirichlet, hi = BcKind::dirichlet;
  std::vector<char> dir;
  std::vector<double> w, cp, cm;

  void build() {
    dir.assign(n, 0);
    w.assign(n, 1.0);
    cp.assign(n, 1.0);
    cm.assign(n, 1.0);
    if (n == 1) {  // inactive axis
      cp[0] = cm[0] = 0.0;
      return;
    }
    cp[n - 1] = 0.0;
    cm[0] = 0.0;
    if (lo == BcKind::dirichlet) dir[0] = 1;
    else {
      w[0] = 0.5;
      cp[0] = 2.0;
    }
    if (hi == BcKind::dirichlet) dir[n - 1] = 1;
    else {
      w[n - 1] = 0.5;
      cm[n - 1] = 2.0;
    }
  }
  bool active() const { return n > 1; }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

}  // namespace

BoundarySpec BoundarySpec::all(BcKind k) {
  BoundarySpec s;
  s.kind.fill(k);
  return s;
}

std::vector<double>& BoundarySpec::data(Face f, const Mesh& m) {
  auto& v = values[static_cast<int>(f)];
  if (v.size() != m.size()) v.assign(m.size(), 0.0);
  return v;
}

void BoundarySpec::set(Face f, const Mesh& m,
                       const std::function<double(double, double, double)>& fn) {
  auto& v = data(f, m);
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) v[m.index(i, j, k)] = fn(m.x(i), m.y(j), m.zeta(k));
}

double BoundarySpec::value(Face f, std::size_t node) const {
  const auto& v = values[static_cast<int>(f)];
  return v.empty() ? 0.0 : v[node];
}

void SolverSettings::validate() const {
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw std::invalid_argument("solver tolerance must lie in (0, 1)");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 1");
}

Face face_of(grid::Side s) {
  switch (s) {
    case grid::Side::bottom: return Face::y_lo;
    case grid::Side::right: return Face::x_hi;
    case grid::Side::top: return Face::y_hi;
    case grid::Side::left: return Face::x_lo;
  }
  return Face::x_lo;
}

void set_side_data(BoundarySpec& bc, const Mesh& m, grid::Side side, int k,
                   const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != m.side_count(side))
    throw std::invalid_argument("set_side_data: trace length does not match side");
  auto& v = bc.data(face_of(side), m);
  for (int n = 0; n < m.side_count(side); ++n) {
    const auto ij = m.side_node(side, n);
    v[m.index(ij[0], ij[1], k)] = values[n];
  }
}

struct PoissonOperator::Impl {
  MeshPtr mesh;
  double kappa = 1.0;
  SolverSettings settings;
  std::array<BcKind, face_count> kinds{};
  AxisStencil ax, ay, az;
  std::vector<int> uid;  // compressed unknown index, -1 for Dirichlet / pinned
  std::size_t n_unknowns = 0;
  bool is_singular = false;
  Method method = Method::conjugate_gradient;
  // Direct path: banded Cholesky factor, row-major band of width bw + 1.
  std::size_t bw = 0;
  std::vector<double> band;
  std::size_t pinned = static_cast<std::size_t>(-1);

  bool dirichlet_node(int i, int j, int k) const { return ax.dir[i] || ay.dir[j] || az.dir[k]; }
  double weight(int i, int j, int k) const { return ax.w[i] * ay.w[j] * az.w[k]; }

  // y = A u, A = -W L (homogeneous). Dirichlet entries of u must be zero.
  void matvec(const std::vector<double>& u, std::vector<double>& y) const {
    const Mesh& m = *mesh;
    const std::size_t sx = 1, sy = m.nx, sz = m.plane_size();
    for (int k = 0; k < m.nz; ++k)
      for (int j = 0; j < m.ny; ++j) {
        const bool djk = ay.dir[j] || az.dir[k];
        for (int i = 0; i < m.nx; ++i) {
          const std::size_t p = m.index(i, j, k);
          if (djk || ax.dir[i]) {
            y[p] = 0.0;
            continue;
          }
          const double up = u[p];
          double s = ax.c * (2.0 * up - (ax.cp[i] != 0.0 ? ax.cp[i] * u[p + sx] : 0.0) -
                             (ax.cm[i] != 0.0 ? ax.cm[i] * u[p - sx] : 0.0));
          s += ay.c * (2.0 * up - (ay.cp[j] != 0.0 ? ay.cp[j] * u[p + sy] : 0.0) -
                       (ay.cm[j] != 0.0 ? ay.cm[j] * u[p - sy] : 0.0));
          if (az.active())
            s += az.c * (2.0 * up - (az.cp[k] != 0.0 ? az.cp[k] * u[p + sz] : 0.0) -
                         (az.cm[k] != 0.0 ? az.cm[k] * u[p - sz] : 0.0));
          y[p] = weight(i, j, k) * s;
        }
      }
    if (pinned != static_cast<std::size_t>(-1)) y[pinned] = 0.0;
  }

  double dirichlet_value(const BoundarySpec& bc, int i, int j, int k, std::size_t p) const {
    if (ax.dir[i]) return bc.value(i == 0 ? Face::x_lo : Face::x_hi, p);
    if (ay.dir[j]) return bc.value(j == 0 ? Face::y_lo : Face::y_hi, p);
    return bc.value(k == 0 ? Face::zeta_lo : Face::zeta_hi, p);
  }

  // Ghost-node contribution of Neumann data at node p.
  double ghost(const BoundarySpec& bc, int i, int j, int k, std::size_t p) const {
    double g = 0.0;
    auto add = [&](const AxisStencil& a, int pos, Face lo, Face hi) {
      if (!a.active()) return;
      if (pos == 0 && a.lo == BcKind::neumann) g += a.c * 2.0 * a.h * bc.value(lo, p);
      if (pos == a.n - 1 && a.hi == BcKind::neumann) g += a.c * 2.0 * a.h * bc.value(hi, p);
    };
    add(ax, i, Face::x_lo, Face::x_hi);
    add(ay, j, Face::y_lo, Face::y_hi);
    add(az, k, Face::zeta_lo, Face::zeta_hi);
    return g;
  }

  // Full nodal field holding Dirichlet values (zero elsewhere).
  std::vector<double> dirichlet_lift(const BoundarySpec& bc) const {
    const Mesh& m = *mesh;
    std::vector<double> d(m.size(), 0.0);
    for (int k = 0; k < m.nz; ++k)
      for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
          if (dirichlet_node(i, j, k)) {
            const std::size_t p = m.index(i, j, k);
            d[p] = dirichlet_value(bc, i, j, k, p);
          }
    return d;
  }

  // Unweighted stencil sum L'u at a non-Dirichlet node using all entries of u.
  double stencil(const std::vector<double>& u, int i, int j, int k, std::size_t p) const {
    const Mesh& m = *mesh;
    const std::size_t sy = m.nx, sz = m.plane_size();
    auto axis = [&](const AxisStencil& a, int pos, std::size_t st) {
      double s = -2.0 * u[p];
      if (a.cp[pos] != 0.0) s += a.cp[pos] * u[p + st];
      if (a.cm[pos] != 0.0) s += a.cm[pos] * u[p - st];
      return a.c * s;
    };
    double s = axis(ax, i, 1) + axis(ay, j, sy);
    if (az.active()) s += axis(az, k, sz);
    return s;
  }

  void factor() {
    const Mesh& m = *mesh;
    // Compressed numbering follows node order, so couplings span at most one row.
    bw = 0;
    std::vector<std::size_t> node_of(n_unknowns);
    for (std::size_t p = 0; p < uid.size(); ++p)
      if (uid[p] >= 0) node_of[uid[p]] = p;
    auto neighbors = [&](std::size_t p, auto&& fn) {
      const int i = static_cast<int>(p % m.nx), j = static_cast<int>(p / m.nx);
      const double wgt = weight(i, j, 0);
      fn(p, wgt * (2.0 * ax.c + 2.0 * ay.c));
      if (ax.cp[i] != 0.0) fn(p + 1, -wgt * ax.c * ax.cp[i]);
      if (ax.cm[i] != 0.0) fn(p - 1, -wgt * ax.c * ax.cm[i]);
      if (ay.cp[j] != 0.0) fn(p + m.nx, -wgt * ay.c * ay.cp[j]);
      if (ay.cm[j] != 0.0) fn(p - m.nx, -wgt * ay.c * ay.cm[j]);
    };
    for (std::size_t r = 0; r < n_unknowns; ++r)
      neighbors(node_of[r], [&](std::size_t q, double) {
        if (uid[q] >= 0) bw = std::max<std::size_t>(bw, r > std::size_t(uid[q]) ? r - uid[q] : uid[q] - r);
      });
    const std::size_t W = bw + 1;
    band.assign(n_unknowns * W, 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return band[r * W + (c + bw - r)]; };
    for (std::size_t r = 0; r < n_unknowns; ++r)
      neighbors(node_of[r], [&](std::size_t q, double v) {
        if (uid[q] >= 0 && std::size_t(uid[q]) <= r) at(r, uid[q]) += v;
      });
    for (std::size_t r = 0; r < n_unknowns; ++r) {
      const std::size_t c0 = r > bw ? r - bw : 0;
      for (std::size_t c = c0; c <= r; ++c) {
        double s = at(r, c);
        const std::size_t k0 = std::max(c0, c > bw ? c - bw : 0);
        for (std::size_t kk = k0; kk < c; ++kk) s -= at(r, kk) * at(c, kk);
        if (c == r) {
          if (!(s > 0.0)) throw std::runtime_error("direct factorization lost definiteness");
          at(r, r) = std::sqrt(s);
        } else {
          at(r, c) = s / at(c, c);
        }
      }
    }
  }

  void direct_solve(std::vector<double>& x) const {
    const std::size_t W = bw + 1;
    auto at = [&](std::size_t r, std::size_t c) { return band[r * W + (c + bw - r)]; };
    for (std::size_t r = 0; r < n_unknowns; ++r) {
      double s = x[r];
      for (std::size_t c = r > bw ? r - bw : 0; c < r; ++c) s -= at(r, c) * x[c];
      x[r] = s / at(r, r);
    }
    for (std::size_t r = n_unknowns; r-- > 0;) {
      double s = x[r];
      for (std::size_t c = r + 1; c <= std::min(n_unknowns - 1, r + bw); ++c) s -= at(c, r) * x[c];
      x[r] = s / at(r, r);
    }
  }
};

PoissonOperator::PoissonOperator(MeshPtr mesh, double kappa, std::array<BcKind, face_count> kinds,
                                 SolverSettings settings)
    : impl_(std::make_unique<Impl>()) {
  settings.validate();
  Impl& s = *impl_;
  s.mesh = std::move(mesh);
  s.kappa = kappa;
  s.settings = settings;
  s.kinds = kinds;
  const Mesh& m = *s.mesh;
  auto setup = [](AxisStencil& a, int n, double h, double coef, BcKind lo, BcKind hi) {
    a.n = n;
    a.h = h;
    a.c = n > 1 ? coef / (h * h) : 0.0;
    a.lo = lo;
    a.hi = hi;
    a.build();
  };
  setup(s.ax, m.nx, m.hx, 1.0, kinds[0], kinds[1]);
  setup(s.ay, m.ny, m.hy, 1.0, kinds[2], kinds[3]);
  if (m.nz > 1) {
    if (!(kappa > 0.0)) throw std::invalid_argument("longitudinal coefficient must be positive");
    setup(s.az, m.nz, m.hz, kappa, kinds[4], kinds[5]);
  } else {
    setup(s.az, 1, 1.0, 0.0, BcKind::neumann, BcKind::neumann);
  }

  s.uid.assign(m.size(), -1);
  bool any_dirichlet = false;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        if (s.dirichlet_node(i, j, k)) {
          any_dirichlet = true;
          continue;
        }
        s.uid[m.index(i, j, k)] = 0;
      }
  s.is_singular = !any_dirichlet;

  const bool planar = m.nz == 1;
  std::size_t free_nodes = 0;
  for (int v : s.uid) free_nodes += v >= 0;
  bool direct = settings.method == Method::direct ||
                (settings.method == Method::automatic && planar && free_nodes < direct_limit);
  if (direct && !planar) throw std::invalid_argument("direct solves are limited to planar meshes");
  if (direct && s.is_singular) {
    // Pin the first node; the consistent singular system fixes it up to a constant.
    s.pinned = 0;
    s.uid[0] = -1;
  }
  int next = 0;
  for (auto& v : s.uid)
    if (v >= 0) v = next++;
  s.n_unknowns = static_cast<std::size_t>(next);
  if (direct) {
    s.method = Method::direct;
    s.factor();
  } else {
    s.method = Method::conjugate_gradient;
    s.n_unknowns = free_nodes;
  }
}

PoissonOperator::~PoissonOperator() = default;
PoissonOperator::PoissonOperator(PoissonOperator&&) noexcept = default;
PoissonOperator& PoissonOperator::operator=(PoissonOperator&&) noexcept = default;

bool PoissonOperator::singular() const { return impl_->is_singular; }
std::size_t PoissonOperator::unknowns() const { return impl_->n_unknowns; }
Method PoissonOperator::method() const { return impl_->method; }
const Mesh& PoissonOperator::mesh() const { return *impl_->mesh; }

ScalarField PoissonOperator::apply(const ScalarField& u, const BoundarySpec& bc) const {
  const Impl& s = *impl_;
  const Mesh& m = *s.mesh;
  if (!u.mesh().same_grid(m)) throw std::invalid_argument("apply: mesh mismatch");
  ScalarField out(u.mesh_ptr());
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        if (s.dirichlet_node(i, j, k)) continue;
        const std::size_t p = m.index(i, j, k);
        out[p] = s.stencil(u.data(), i, j, k, p) + s.ghost(bc, i, j, k, p);
      }
  return out;
}

ScalarField PoissonOperator::solve(const ScalarField& rhs, const BoundarySpec& bc,
                                   SolveReport* report) const {
  const Impl& s = *impl_;
  const Mesh& m = *s.mesh;
  if (!rhs.mesh().same_grid(m)) throw std::invalid_argument("solve: rhs mesh mismatch");
  for (int f = 0; f < face_count; ++f)
    if (!bc.values[f].empty() && bc.values[f].size() != m.size())
      throw std::invalid_argument("solve: boundary data size mismatch");

  const std::vector<double> lift = s.dirichlet_lift(bc);
  // b = -W (f - ghost - L lift) on free nodes.
  std::vector<double> b(m.size(), 0.0);
  double scale = 0.0, wsum = 0.0;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        if (s.dirichlet_node(i, j, k)) continue;
        const std::size_t p = m.index(i, j, k);
        const double w = s.weight(i, j, k);
        const double g = s.ghost(bc, i, j, k, p);
        const double lifted = s.stencil(lift, i, j, k, p);
        b[p] = -w * (rhs[p] - g - lifted);
        scale += w * (std::abs(rhs[p]) + std::abs(g));
        wsum += w;
      }

  SolveReport rep;
  rep.used = s.method;
  if (s.is_singular) {
    double total = 0.0;
    for (double v : b) total += v;
    const double defect = scale > 0.0 ? std::abs(total) / scale : 0.0;
    rep.compatibility_defect = defect;
    if (s.settings.compatibility_tolerance >= 0.0 && defect > s.settings.compatibility_tolerance) {
      std::ostringstream os;
      os << "incompatible Neumann data: source integral and boundary flux differ (relative defect "
         << defect << ")";
      throw IncompatibleData(os.str(), defect);
    }
    const double c = -total / wsum;
    for (int k = 0; k < m.nz; ++k)
      for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) b[m.index(i, j, k)] += s.weight(i, j, k) * c;
  }

  std::vector<double> x(m.size(), 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm > 0.0) {
    if (s.method == Method::direct) {
      std::vector<double> comp(s.n_unknowns);
      for (std::size_t p = 0; p < m.size(); ++p)
        if (s.uid[p] >= 0) comp[s.uid[p]] = b[p];
      s.direct_solve(comp);
      for (std::size_t p = 0; p < m.size(); ++p)
        if (s.uid[p] >= 0) x[p] = comp[s.uid[p]];
      std::vector<double> ax(m.size());
      s.matvec(x, ax);
      double r2 = 0.0;
      for (std::size_t p = 0; p < m.size(); ++p)
        if (p != s.pinned) r2 += (b[p] - ax[p]) * (b[p] - ax[p]);
      rep.relative_residual = std::sqrt(r2) / bnorm;
    } else {
      const int max_it = s.settings.max_iterations > 0
                             ? s.settings.max_iterations
                             : static_cast<int>(std::ceil(10.0 * std::sqrt(double(s.n_unknowns))));
      std::vector<double> r = b, d = b, q(m.size());
      double rr = dot(r, r);
      const double target = s.settings.tolerance * bnorm;
      int it = 0;
      rep.residual_history.push_back(1.0);
      while (std::sqrt(rr) > target && it < max_it) {
        s.matvec(d, q);
        const double alpha = rr / dot(d, q);
        for (std::size_t p = 0; p < x.size(); ++p) {
          x[p] += alpha * d[p];
          r[p] -= alpha * q[p];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t p = 0; p < d.size(); ++p) d[p] = r[p] + beta * d[p];
        ++it;
        rep.residual_history.push_back(std::sqrt(rr) / bnorm);
      }
      rep.iterations = it;
      rep.relative_residual = std::sqrt(rr) / bnorm;
      if (std::sqrt(rr) > target) {
        std::ostringstream os;
        os << "conjugate gradients did not converge in " << it << " iterations (relative residual "
           << rep.relative_residual << ")";
        if (report) *report = rep;
        throw SolverError(os.str(), rep);
      }
    }
  }

  ScalarField u(rhs.mesh_ptr());
  for (std::size_t p = 0; p < m.size(); ++p) u[p] = x[p] + lift[p];
  if (s.is_singular && bnorm > 0.0) {
    double mean = 0.0;
    for (int k = 0; k < m.nz; ++k)
      for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) mean += s.weight(i, j, k) * u.at(i, j, k);
    mean /= wsum;
    for (std::size_t p = 0; p < m.size(); ++p) u[p] -= mean;
  }
  if (report) *report = rep;
  return u;
}

ScalarField solve_poisson_2d(const ScalarField& rhs, const BoundarySpec& bc,
                             const SolverSettings& settings, SolveReport* report) {
  if (!rhs.mesh().planar()) throw std::invalid_argument("solve_poisson_2d expects a planar mesh");
  PoissonOperator op(rhs.mesh_ptr(), 1.0, bc.kind, settings);
  return op.solve(rhs, bc, report);
}

ScalarField solve_anisotropic_poisson_3d(double kappa, const ScalarField& rhs,
                                         const BoundarySpec& bc, const SolverSettings& settings,
                                         SolveReport* report) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0, 1)");
  if (rhs.mesh().planar())
    throw std::invalid_argument("solve_anisotropic_poisson_3d expects a volume mesh");
  PoissonOperator op(rhs.mesh_ptr(), kappa, bc.kind, settings);
  return op.solve(rhs, bc, report);
}

namespace {

std::array<BcKind, face_count> kinds_with_neumann(bool x_faces) {
  const BcKind a = x_faces ? BcKind::neumann : BcKind::dirichlet;
  const BcKind b = x_faces ? BcKind::dirichlet : BcKind::neumann;
  return {a, a, b, b, BcKind::dirichlet, BcKind::dirichlet};
}

// Derivative along a side trace (increasing coordinate order).
std::vector<double> along(const std::vector<double>& v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return d;
}

std::vector<double> scaled(std::vector<double> v, double s) {
  for (double& x : v) x *= s;
  return v;
}

// Boundary values of a field along a side, plus coefficient times a trace.
std::vector<double> side_values(const ScalarField& f, grid::Side sd, double sign,
                                const std::vector<double>& extra, double extra_sign) {
  const Mesh& m = f.mesh();
  std::vector<double> v(m.side_count(sd));
  for (int n = 0; n < m.side_count(sd); ++n) {
    const auto ij = m.side_node(sd, n);
    v[n] = sign * (f.at(ij[0], ij[1]) + extra_sign * extra[n]);
  }
  return v;
}

}  // namespace

DivCurlSolver::DivCurlSolver(MeshPtr plane, SolverSettings settings)
    : plane_(plane),
      settings_(settings),
      x_neumann_(plane, 1.0, kinds_with_neumann(true), settings),
      y_neumann_(plane, 1.0, kinds_with_neumann(false), settings) {
  if (!plane_->planar()) throw std::invalid_argument("div-curl solves operate on planar meshes");
}

VectorField2 DivCurlSolver::solve(const ScalarField& div_src, const ScalarField& curl_src,
                                  const grid::BoundaryTrace& data, TraceKind kind,
                                  double constraint, DivCurlReport* report) const {
  using grid::Side;
  grid::require_same_mesh(div_src, curl_src, "solve_divcurl_2d");
  if (!div_src.mesh().same_grid(*plane_)) throw std::invalid_argument("div-curl: mesh mismatch");
  const Mesh& m = *plane_;
  for (Side sd : grid::all_sides)
    if (static_cast<int>(data[sd].size()) != m.side_count(sd))
      throw std::invalid_argument("div-curl: boundary trace does not match mesh");

  const ScalarField& matched = kind == TraceKind::tangential ? curl_src : div_src;
  const double src_int = grid::plane_integral(matched);
  double abs_int = 0.0;
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) abs_int += grid::node_weight(m, i, j) * std::abs(matched.at(i, j));
  grid::BoundaryTrace absdata = data;
  for (auto& v : absdata.side)
    for (double& x : v) x = std::abs(x);
  const double line = grid::line_integral(m, data);
  const double scale = abs_int + grid::line_integral(m, absdata) + std::abs(constraint);
  DivCurlReport rep;
  rep.constraint_defect = scale > 0.0 ? std::abs(constraint - src_int) / scale : 0.0;
  rep.trace_defect = scale > 0.0 ? std::abs(line - src_int) / scale : 0.0;
  if (settings_.compatibility_tolerance >= 0.0 &&
      rep.constraint_defect > settings_.compatibility_tolerance) {
    std::ostringstream os;
    os << "div-curl: " << (kind == TraceKind::tangential ? "circulation" : "flux")
       << " constraint " << constraint << " inconsistent with source integral " << src_int;
    throw IncompatibleData(os.str(), rep.constraint_defect);
  }

  const ScalarField rhs_x = grid::d_dx4(div_src) - grid::d_dy4(curl_src);
  const ScalarField rhs_y = grid::d_dy4(div_src) + grid::d_dx4(curl_src);
  BoundarySpec bx, by;
  const auto& bot = data[Side::bottom];
  const auto& rgt = data[Side::right];
  const auto& top = data[Side::top];
  const auto& lft = data[Side::left];
  if (kind == TraceKind::tangential) {
    // tau = (1,0) bottom, (0,1) right, (-1,0) top, (0,-1) left
    bx.kind = kinds_with_neumann(true);
    set_side_data(bx, m, Side::bottom, 0, bot);
    set_side_data(bx, m, Side::top, 0, scaled(top, -1.0));
    // dAx/dx = D - dAy/dy
    set_side_data(bx, m, Side::right, 0, side_values(div_src, Side::right, 1.0, along(rgt, m.hy), -1.0));
    set_side_data(bx, m, Side::left, 0, side_values(div_src, Side::left, -1.0, along(lft, m.hy), 1.0));
    by.kind = kinds_with_neumann(false);
    set_side_data(by, m, Side::right, 0, rgt);
    set_side_data(by, m, Side::left, 0, scaled(lft, -1.0));
    // dAy/dy = D - dAx/dx
    set_side_data(by, m, Side::top, 0, side_values(div_src, Side::top, 1.0, along(top, m.hx), 1.0));
    set_side_data(by, m, Side::bottom, 0, side_values(div_src, Side::bottom, -1.0, along(bot, m.hx), -1.0));
    VectorField2 a(x_neumann_.solve(rhs_x, bx, &rep.x), y_neumann_.solve(rhs_y, by, &rep.y));
    if (report) *report = rep;
    return a;
  }
  // nu = (0,-1) bottom, (1,0) right, (0,1) top, (-1,0) left
  bx.kind = kinds_with_neumann(false);
  set_side_data(bx, m, Side::right, 0, rgt);
  set_side_data(bx, m, Side::left, 0, scaled(lft, -1.0));
  // dAx/dy = dAy/dx - C
  set_side_data(bx, m, Side::top, 0, side_values(curl_src, Side::top, -1.0, along(top, m.hx), -1.0));
  set_side_data(bx, m, Side::bottom, 0, side_values(curl_src, Side::bottom, 1.0, along(bot, m.hx), 1.0));
  by.kind = kinds_with_neumann(true);
  set_side_data(by, m, Side::top, 0, top);
  set_side_data(by, m, Side::bottom, 0, scaled(bot, -1.0));
  // dAy/dx = C + dAx/dy
  set_side_data(by, m, Side::right, 0, side_values(curl_src, Side::right, 1.0, along(rgt, m.hy), 1.0));
  set_side_data(by, m, Side::left, 0, side_values(curl_src, Side::left, -1.0, along(lft, m.hy), -1.0));
  VectorField2 a(y_neumann_.solve(rhs_x, bx, &rep.x), x_neumann_.solve(rhs_y, by, &rep.y));
  if (report) *report = rep;
  return a;
}

VectorField2 solve_divcurl_2d(const ScalarField& div_src, const ScalarField& curl_src,
                              const grid::BoundaryTrace& data, TraceKind kind, double constraint,
                              const SolverSettings& settings, DivCurlReport* report) {
  DivCurlSolver s(div_src.mesh_ptr(), settings);
  return s.solve(div_src, curl_src, data, kind, constraint, report);
}

}  // namespace parax::elliptic
