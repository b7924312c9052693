#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "parax/io.hpp"
#include "parax/parallel.hpp"
#include "parax/verify.hpp"

#ifndef PARAX_VERSION
#define PARAX_VERSION "0.0.0"
#endif

namespace parax::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json order_diagnostics(const hierarchy::OrderDiagnostics& d) {
  return {{"order", d.n},
          {"fixed_point_iterations", d.fixed_point_iterations},
          {"solver_iterations", d.solver_iterations},
          {"max_solver_residual", d.max_solver_residual},
          {"gauss_residual", d.gauss_residual},
          {"solenoidal_residual", d.solenoidal_residual},
          {"pseudo_field_residual", d.pseudo_field_residual},
          {"circulation_defect", d.circulation_defect},
          {"flux_defect", d.flux_defect}};
}

ordered_json hierarchy_json(const hierarchy::FieldHierarchy& h) {
  ordered_json orders = ordered_json::array();
  for (const auto& d : h.diagnostics) orders.push_back(order_diagnostics(d));
  return orders;
}

ordered_json report_json(const verify::ConvergenceReport& r) {
  return {{"target", r.target},          {"parameter_name", r.parameter_name},
          {"parameter", r.parameter},    {"error", r.error},
          {"slope", r.slope},            {"target_order", r.target_order},
          {"passed", r.passed()}};
}

std::string report_csv(const verify::ConvergenceReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.parameter_name << ",error\n";
  for (std::size_t i = 0; i < r.parameter.size(); ++i) os << r.parameter[i] << ',' << r.error[i] << '\n';
  return os.str();
}

bool due(int step, int last, int cadence) { return step % cadence == 0 || step == last; }

/// Source snapshots for the analytic kinds.
hierarchy::SourceMoments analytic_sources(const RunConfig& cfg, const grid::MeshPtr& m, double t) {
  switch (cfg.sources.kind) {
    case SourceKind::zero: return hierarchy::SourceMoments::zeros(m);
    case SourceKind::quasi_static:
      return verify::quasi_static_sources(m, cfg.scaling.beta, t, cfg.sources.dt);
    case SourceKind::static_mode: return verify::mms_case("static-mode", m, cfg.scaling.beta).sources.at(0);
  }
  return hierarchy::SourceMoments::zeros(m);
}

void note(std::ostream* log, const std::string& s) {
  if (log) *log << s << '\n';
}

/// Runs the analytic source sequence; calls fn(step, hierarchy, sources, history).
template <class Fn>
void solve_sequence(const RunConfig& cfg, std::ostream* log, Fn&& fn) {
  const auto m = cfg.build_mesh();
  const hierarchy::Solvers solvers(m, cfg.scaling.beta, cfg.hierarchy_settings().solver);
  hierarchy::FieldHistory history;
  for (int k = 0; k <= cfg.sources.steps; ++k) {
    const double t = k * cfg.sources.dt;
    const auto src = analytic_sources(cfg, m, t);
    auto h = hierarchy::solve_hierarchy(cfg.hierarchy.n_max, {src}, history, t, cfg.scaling.beta, cfg.eta(),
                                        cfg.external_field(), cfg.hierarchy_settings(), &solvers);
    note(log, "step " + std::to_string(k) + " solved (t = " + std::to_string(t) + ")");
    fn(k, h, src, history);
    history.push(std::move(h));
  }
}

Artifacts run_fields(const RunConfig& cfg, std::ostream* log) {
  Artifacts a;
  ordered_json steps = ordered_json::array();
  solve_sequence(cfg, log, [&](int k, const hierarchy::FieldHierarchy& h, const hierarchy::SourceMoments&,
                               const hierarchy::FieldHistory&) {
    if (due(k, cfg.sources.steps, cfg.output.cadence))
      for (const auto& f : h.orders)
        a.files[Artifacts::csv_name("fields", std::to_string(f.n), k)] = field_order_csv(f);
    steps.push_back({{"step", k}, {"time", h.time}, {"orders", hierarchy_json(h)}});
  });
  a.results_json = ordered_json{{"steps", steps}}.dump(2);
  return a;
}

Artifacts run_residual(const RunConfig& cfg, std::ostream* log) {
  Artifacts a;
  ordered_json steps = ordered_json::array();
  solve_sequence(cfg, log, [&](int k, const hierarchy::FieldHierarchy& h, const hierarchy::SourceMoments& src,
                               const hierarchy::FieldHistory& history) {
    if (history.empty() && !(src.Jperp.is_zero() && src.Jzeta.is_zero())) {
      steps.push_back({{"step", k}, {"time", h.time}, {"skipped", "moving charge needs a history snapshot"}});
      return;
    }
    const auto rf = verify::maxwell_residual_fields(h, cfg.eta(), {src}, history);
    const auto r = verify::residual_report(rf, h, cfg.eta());
    ordered_json eqs = ordered_json::array();
    for (const auto& e : r.equations) eqs.push_back({{"name", e.name}, {"l2", e.l2}, {"max", e.max}});
    steps.push_back({{"step", k},
                     {"time", h.time},
                     {"equations", eqs},
                     {"combined_l2", r.combined_l2()},
                     {"combined_max", r.combined_max()},
                     {"orders", hierarchy_json(h)}});
    if (due(k, cfg.sources.steps, cfg.output.cadence)) {
      std::vector<std::string> names;
      std::vector<const grid::ScalarField*> cols;
      for (int e = 0; e < verify::ResidualFields::count; ++e) {
        names.emplace_back(verify::ResidualFields::names()[e]);
        cols.push_back(&rf.r[e]);
      }
      a.files[Artifacts::csv_name("residual", "total", k)] = grid::to_csv(names, cols);
    }
  });
  a.results_json = ordered_json{{"eta", cfg.eta()}, {"steps", steps}}.dump(2);
  return a;
}

/// Maps an MMS case id onto the solver study that uses it.
std::string mms_target(const std::string& id) {
  const auto t = verify::convergence_targets();
  if (std::find(t.begin(), t.end(), id) != t.end()) return id;
  if (id == "poisson-sin") return "poisson-2d";
  if (id == "ez-mode-111") return "anisotropic-3d";
  if (id.rfind("divcurl-", 0) == 0) return "divcurl-2d";
  if (id == "static-mode") return "eperp-order";
  if (id == "bz-ramp") return "bz-order";
  throw std::invalid_argument("MMS case '" + id + "' has no convergence study");
}

Artifacts run_mms(const RunConfig& cfg, std::ostream* log) {
  Artifacts a;
  const std::string target = mms_target(cfg.verify.mms_case);
  note(log, "mms " + cfg.verify.mms_case + " -> " + target);
  const auto r = verify::convergence_study(target, cfg.verify.intervals, cfg.scaling.beta);
  a.files[Artifacts::csv_name("mms", "0", 0)] = report_csv(r);
  a.results_json = ordered_json{{"case", cfg.verify.mms_case}, {"report", report_json(r)}}.dump(2);
  a.passed = r.passed();
  return a;
}

Artifacts run_convergence(const RunConfig& cfg, std::ostream* log) {
  Artifacts a;
  verify::EtaStudyConfig s;
  s.intervals_perp = cfg.verify.eta_intervals_perp;
  s.intervals_zeta = cfg.verify.eta_intervals_zeta;
  s.beta = cfg.scaling.beta;
  s.dt = cfg.sources.dt;
  s.etas = cfg.verify.etas;
  s.n_max = cfg.hierarchy.n_max;
  s.settings = cfg.hierarchy_settings();
  note(log, "eta study " + std::to_string(s.intervals_perp) + "^2 x " + std::to_string(s.intervals_zeta));
  const auto st = verify::eta_scaling_study(s);
  ordered_json fits = ordered_json::array();
  for (std::size_t n = 0; n < st.fits.size(); ++n) {
    fits.push_back(report_json(st.fits[n]));
    a.passed = a.passed && st.fits[n].passed();
    a.files[Artifacts::csv_name("convergence", std::to_string(n), 0)] = report_csv(st.fits[n]);
  }
  a.results_json = ordered_json{{"fits", fits}, {"raw_fine", st.raw_fine}}.dump(2);
  return a;
}

Artifacts run_pic_verb(const RunConfig& cfg, std::ostream* log) {
  Artifacts a;
  const auto pc = cfg.pic_config();
  std::ostringstream diag;
  diag.precision(17);
  diag << "step,time,alive,absorbed,total_weight,charge_residual,rms_radius\n";
  ordered_json steps = ordered_json::array();
  pic::run_pic(pc, [&](const pic::StepRecord& r) {
    const auto& d = r.diag;
    diag << d.step << ',' << d.time << ',' << d.alive << ',' << d.absorbed << ',' << d.total_weight << ','
         << d.charge_residual << ',' << d.rms_radius << '\n';
    ordered_json norms = ordered_json::array();
    for (const auto& n : d.norms)
      norms.push_back({{"Ez", n.Ez}, {"Bz", n.Bz}, {"Eperp", n.Eperp}, {"Bperp", n.Bperp}, {"Ecal", n.Ecal}});
    steps.push_back({{"step", d.step},
                     {"alive", d.alive},
                     {"absorbed", d.absorbed},
                     {"charge_residual", d.charge_residual},
                     {"rms_radius", d.rms_radius},
                     {"norms", norms},
                     {"orders", hierarchy_json(r.fields)}});
    if (due(d.step, pc.steps, cfg.output.cadence)) {
      for (const auto& f : r.fields.orders)
        a.files[Artifacts::csv_name("fields", std::to_string(f.n), d.step)] = field_order_csv(f);
      std::ostringstream os;
      r.particles.write_csv(os);
      a.files[Artifacts::csv_name("particles", "total", d.step)] = os.str();
    }
    note(log, "pic step " + std::to_string(d.step) + ": " + std::to_string(d.alive) + " alive");
  });
  a.files["pic_diagnostics.csv"] = diag.str();
  a.results_json = ordered_json{{"steps", steps}}.dump(2);
  return a;
}

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw OutputError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

ordered_json error_report(Verb verb, const std::string& type, const std::string& message) {
  return {{"status", "error"}, {"verb", to_string(verb)}, {"type", type}, {"message", message}};
}

}  // namespace

std::string version() { return PARAX_VERSION; }

std::string Artifacts::csv_name(const std::string& kind, const std::string& order, int step) {
  return kind + "_" + order + "_" + std::to_string(step) + ".csv";
}

std::string field_order_csv(const hierarchy::FieldOrder& f) {
  return grid::to_csv({"Ez", "Bz", "Ex", "Ey", "Bx", "By", "Ecal_x", "Ecal_y"},
                      {&f.Ez, &f.Bz, &f.Eperp.x, &f.Eperp.y, &f.Bperp.x, &f.Bperp.y, &f.Ecal.x, &f.Ecal.y});
}

Verb parse_verb(const std::string& s) {
  if (s == "fields") return Verb::fields;
  if (s == "pic") return Verb::pic;
  if (s == "mms") return Verb::mms;
  if (s == "residual") return Verb::residual;
  if (s == "convergence") return Verb::convergence;
  const std::string hint = suggest(s, {"fields", "pic", "mms", "residual", "convergence"});
  throw std::invalid_argument("unknown command '" + s + "'" + (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
}

std::string to_string(Verb v) {
  switch (v) {
    case Verb::fields: return "fields";
    case Verb::pic: return "pic";
    case Verb::mms: return "mms";
    case Verb::residual: return "residual";
    case Verb::convergence: return "convergence";
  }
  return "fields";
}

Artifacts execute(Verb verb, const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  Artifacts a;
  switch (verb) {
    case Verb::fields: a = run_fields(cfg, log); break;
    case Verb::pic: a = run_pic_verb(cfg, log); break;
    case Verb::mms: a = run_mms(cfg, log); break;
    case Verb::residual: a = run_residual(cfg, log); break;
    case Verb::convergence: a = run_convergence(cfg, log); break;
  }
  a.verb = to_string(verb);
  a.config_text = serialize(cfg);
  return a;
}

void write_outputs(const Artifacts& a, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory '" + dir.string() + "'");
  const fs::path manifest = dir / "manifest.json";
  for (const fs::path& stale : {manifest, dir / "error.json"}) {
    fs::remove(stale, ec);
    if (ec) throw OutputError("cannot remove stale '" + stale.string() + "'");
  }
  ordered_json files = ordered_json::array();
  for (const auto& [name, content] : a.files) {
    write_file(dir / name, content);
    files.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a", fnv1a_hex(content)}});
  }
  const ordered_json m = {{"program", "parax"},
                          {"version", version()},
                          {"verb", a.verb},
                          {"status", a.passed ? "ok" : "check_failed"},
                          {"config_hash", fnv1a_hex(a.config_text)},
                          {"config", a.config_text},
                          {"threads", default_thread_count()},
                          {"files", files},
                          {"results", ordered_json::parse(a.results_json)}};
  write_file(manifest, m.dump(2) + "\n");
}

int run_command(Verb verb, const RunConfig& cfg, const RunOptions& opt, std::ostream& log, std::ostream& err) {
  const fs::path dir = opt.out.empty() ? fs::path(cfg.output.directory) : opt.out;
  std::string type, message;
  int code = 0;
  try {
    const Artifacts a = execute(verb, cfg, opt.quiet ? nullptr : &log);
    write_outputs(a, dir);
    if (!opt.quiet)
      log << to_string(verb) << ": wrote " << a.files.size() << " files and manifest to " << dir.string() << '\n';
    if (!a.passed) {
      err << error_report(verb, "check_failed", "verification target not met; see manifest").dump() << '\n';
      return 4;
    }
    return 0;
  } catch (const OutputError& e) {
    type = "output";
    message = e.what();
    code = 3;
  } catch (const std::invalid_argument& e) {
    type = "invalid_argument";
    message = e.what();
    code = 2;
  } catch (const std::exception& e) {
    type = "runtime";
    message = e.what();
    code = 1;
  }
  const ordered_json rep = error_report(verb, type, message);
  err << rep.dump() << '\n';
  if (type != "output") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!ec) {
      try {
        write_file(dir / "error.json", rep.dump(2) + "\n");
      } catch (const OutputError&) {
      }
    }
  }
  return code;
}

}  // namespace parax::io
