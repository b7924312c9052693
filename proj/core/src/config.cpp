#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "parax/io.hpp"
#include "parax/verify.hpp"

namespace parax::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T v{};
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError(key, "cannot parse '" + text + "' as a number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) throw ConfigError(key, "value must be finite");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

struct Key {
  std::string section, name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  /// Empty optional means "unset, omit from the canonical text".
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class T, class Member>
Key number_key(std::string section, std::string name, Member m) {
  return {section, name,
          [m](RunConfig& c, const std::string& k, const std::string& v) { m(c) = parse_number<T>(k, v); },
          [m](const RunConfig& c) -> std::optional<std::string> {
            const T v = m(const_cast<RunConfig&>(c));
            if constexpr (std::is_floating_point_v<T>)
              return fmt(v);
            else
              return std::to_string(v);
          }};
}

#define PARAX_NUM(T, section, name, expr) \
  number_key<T>(section, name, [](RunConfig& c) -> T& { return expr; })

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"scaling", "mode",
                 [](RunConfig& c, const std::string& key, const std::string& v) {
                   const std::string t = trim(v);
                   if (t == "dimensionless")
                     c.scaling.mode = ScalingMode::dimensionless;
                   else if (t == "physical")
                     c.scaling.mode = ScalingMode::physical;
                   else
                     throw ConfigError(key, "expected 'dimensionless' or 'physical', got '" + t + "'");
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return to_string(c.scaling.mode); }});
    k.push_back(PARAX_NUM(double, "scaling", "beta", c.scaling.beta));
    k.push_back(PARAX_NUM(double, "scaling", "eta", c.scaling.eta));
    k.push_back(PARAX_NUM(double, "scaling", "l", c.scaling.l));
    k.push_back(PARAX_NUM(double, "scaling", "vbar", c.scaling.vbar));

    k.push_back(PARAX_NUM(double, "mesh", "a", c.mesh.a));
    k.push_back(PARAX_NUM(double, "mesh", "b", c.mesh.b));
    k.push_back(PARAX_NUM(double, "mesh", "Z", c.mesh.Z));
    k.push_back(PARAX_NUM(int, "mesh", "nx", c.mesh.nx));
    k.push_back(PARAX_NUM(int, "mesh", "ny", c.mesh.ny));
    k.push_back(PARAX_NUM(int, "mesh", "nzeta", c.mesh.nzeta));

    k.push_back(PARAX_NUM(int, "hierarchy", "n_max", c.hierarchy.n_max));
    k.push_back(PARAX_NUM(double, "hierarchy", "tolerance", c.hierarchy.tolerance));
    k.push_back(PARAX_NUM(int, "hierarchy", "max_fixed_point", c.hierarchy.max_fixed_point));

    k.push_back({"sources", "kind",
                 [](RunConfig& c, const std::string& key, const std::string& v) {
                   const std::string t = trim(v);
                   if (t == "zero")
                     c.sources.kind = SourceKind::zero;
                   else if (t == "quasi_static")
                     c.sources.kind = SourceKind::quasi_static;
                   else if (t == "static_mode")
                     c.sources.kind = SourceKind::static_mode;
                   else
                     throw ConfigError(key, "expected zero, quasi_static or static_mode, got '" + t + "'");
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return to_string(c.sources.kind); }});
    k.push_back(PARAX_NUM(double, "sources", "dt", c.sources.dt));
    k.push_back(PARAX_NUM(int, "sources", "steps", c.sources.steps));

    k.push_back({"pic", "family",
                 [](RunConfig& c, const std::string& key, const std::string& v) {
                   try {
                     c.pic.family = pic::parse_family(trim(v));
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError(key, e.what());
                   }
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return pic::to_string(c.pic.family); }});
    k.push_back(PARAX_NUM(std::size_t, "pic", "N", c.pic.N));
    k.push_back(PARAX_NUM(std::uint64_t, "pic", "seed", c.pic.seed));
    k.push_back(PARAX_NUM(double, "pic", "dt", c.pic.dt));
    k.push_back(PARAX_NUM(int, "pic", "steps", c.pic.steps));
    k.push_back(PARAX_NUM(double, "pic", "charge", c.pic.charge));
    for (const char* name : {"cx", "cy"}) {
      const bool is_x = name[1] == 'x';
      k.push_back({"pic", name,
                   [is_x](RunConfig& c, const std::string& key, const std::string& v) {
                     (is_x ? c.pic.cx : c.pic.cy) = parse_number<double>(key, v);
                   },
                   [is_x](const RunConfig& c) -> std::optional<std::string> {
                     const auto& o = is_x ? c.pic.cx : c.pic.cy;
                     if (!o) return std::nullopt;
                     return fmt(*o);
                   }});
    }
    k.push_back(PARAX_NUM(double, "pic", "rx", c.pic.rx));
    k.push_back(PARAX_NUM(double, "pic", "ry", c.pic.ry));
    k.push_back(PARAX_NUM(double, "pic", "zeta_lo", c.pic.zeta_lo));
    k.push_back(PARAX_NUM(double, "pic", "zeta_hi", c.pic.zeta_hi));
    k.push_back(PARAX_NUM(double, "pic", "zeta_mean", c.pic.zeta_mean));
    k.push_back(PARAX_NUM(double, "pic", "zeta_sigma", c.pic.zeta_sigma));
    k.push_back(PARAX_NUM(double, "pic", "vx", c.pic.vx));
    k.push_back(PARAX_NUM(double, "pic", "vy", c.pic.vy));
    k.push_back(PARAX_NUM(double, "pic", "vzeta", c.pic.vzeta));
    k.push_back(PARAX_NUM(double, "pic", "v_sigma_perp", c.pic.v_sigma_perp));
    k.push_back(PARAX_NUM(double, "pic", "v_sigma_zeta", c.pic.v_sigma_zeta));
    k.push_back(PARAX_NUM(double, "pic", "total_charge", c.pic.total_charge));

    k.push_back(PARAX_NUM(double, "external", "bx", c.external.bx));
    k.push_back(PARAX_NUM(double, "external", "by", c.external.by));
    k.push_back(PARAX_NUM(double, "external", "bz", c.external.bz));

    k.push_back({"verify", "case",
                 [](RunConfig& c, const std::string&, const std::string& v) { c.verify.mms_case = trim(v); },
                 [](const RunConfig& c) -> std::optional<std::string> { return c.verify.mms_case; }});
    k.push_back({"verify", "intervals",
                 [](RunConfig& c, const std::string& key, const std::string& v) {
                   c.verify.intervals = parse_list<int>(key, v);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return join(c.verify.intervals); }});
    k.push_back({"verify", "etas",
                 [](RunConfig& c, const std::string& key, const std::string& v) {
                   c.verify.etas = parse_list<double>(key, v);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return join(c.verify.etas); }});
    k.push_back(PARAX_NUM(int, "verify", "eta_intervals_perp", c.verify.eta_intervals_perp));
    k.push_back(PARAX_NUM(int, "verify", "eta_intervals_zeta", c.verify.eta_intervals_zeta));

    k.push_back({"output", "directory",
                 [](RunConfig& c, const std::string&, const std::string& v) { c.output.directory = trim(v); },
                 [](const RunConfig& c) -> std::optional<std::string> { return c.output.directory; }});
    k.push_back(PARAX_NUM(int, "output", "cadence", c.output.cadence));
    return k;
  }();
  return table;
}

#undef PARAX_NUM

std::vector<std::string> sections() {
  std::vector<std::string> s;
  for (const auto& k : keys())
    if (std::find(s.begin(), s.end(), k.section) == s.end()) s.push_back(k.section);
  return s;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

bool known_mms_case(const std::string& id) {
  const auto t = verify::convergence_targets();
  if (std::find(t.begin(), t.end(), id) != t.end()) return true;
  const auto c = verify::mms_case_ids();
  return std::find(c.begin(), c.end(), id) != c.end();
}

}  // namespace

std::string to_string(ScalingMode m) { return m == ScalingMode::physical ? "physical" : "dimensionless"; }

std::string to_string(SourceKind k) {
  switch (k) {
    case SourceKind::zero: return "zero";
    case SourceKind::quasi_static: return "quasi_static";
    case SourceKind::static_mode: return "static_mode";
  }
  return "zero";
}

std::string suggest(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
  for (const auto& c : candidates) {
    std::vector<std::size_t> row(c.size() + 1);
    for (std::size_t j = 0; j <= c.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= word.size(); ++i) {
      std::size_t diag = row[0];
      row[0] = i;
      for (std::size_t j = 1; j <= c.size(); ++j) {
        const std::size_t up = row[j];
        row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (word[i - 1] == c[j - 1] ? 0 : 1)});
        diag = up;
      }
    }
    if (row[c.size()] < best_d) {
      best_d = row[c.size()];
      best = c;
    }
  }
  return best;
}

double RunConfig::eta() const {
  return scaling.mode == ScalingMode::dimensionless ? scaling.eta : scaling_parameters().eta;
}

frames::ScalingParameters RunConfig::scaling_parameters() const {
  if (scaling.mode == ScalingMode::dimensionless)
    return frames::dimensionless_scaling(scaling.eta, scaling.beta);
  return frames::compute_scaling(scaling.l, scaling.vbar, frames::si_electron(), scaling.beta);
}

grid::MeshPtr RunConfig::build_mesh() const {
  return grid::build_mesh(mesh.a, mesh.b, mesh.Z, mesh.nx, mesh.ny, mesh.nzeta);
}

hierarchy::HierarchySettings RunConfig::hierarchy_settings() const {
  hierarchy::HierarchySettings s;
  s.tolerance = hierarchy.tolerance;
  s.solver.tolerance = hierarchy.tolerance;
  s.max_fixed_point = hierarchy.max_fixed_point;
  return s;
}

hierarchy::ExternalField RunConfig::external_field() const {
  return {external.bx, external.by, external.bz};
}

pic::PicConfig RunConfig::pic_config() const {
  pic::PicConfig p;
  p.mesh = build_mesh();
  p.beta = scaling.beta;
  p.eta = eta();
  p.n_max = hierarchy.n_max;
  p.charge = pic.charge;
  p.dt = pic.dt;
  p.steps = pic.steps;
  p.Be = external_field();
  p.settings = hierarchy_settings();
  auto& s = p.sampling;
  s.family = pic.family;
  s.count = pic.N;
  s.seed = pic.seed;
  if (pic.cx) s.cx = *pic.cx;
  if (pic.cy) s.cy = *pic.cy;
  s.rx = pic.rx;
  s.ry = pic.ry;
  s.zeta_lo = pic.zeta_lo;
  s.zeta_hi = pic.zeta_hi;
  s.zeta_mean = pic.zeta_mean;
  s.zeta_sigma = pic.zeta_sigma;
  s.v_mean = {pic.vx, pic.vy, pic.vzeta};
  s.v_sigma_perp = pic.v_sigma_perp;
  s.v_sigma_zeta = pic.v_sigma_zeta;
  s.total_charge = pic.total_charge;
  return p;
}

void RunConfig::validate() const {
  require(scaling.beta > 0.0 && scaling.beta < 1.0, "scaling.beta",
          "must lie in (0, 1), got " + fmt(scaling.beta));
  if (scaling.mode == ScalingMode::dimensionless) {
    require(scaling.eta > 0.0 && scaling.eta < 1.0, "scaling.eta",
            "must lie in (0, 1), got " + fmt(scaling.eta));
  } else {
    require(scaling.l > 0.0, "scaling.l", "must be positive");
    require(scaling.vbar > 0.0, "scaling.vbar", "must be positive in physical mode");
    const double eta = scaling_parameters().eta;
    require(eta < 1.0, "scaling.vbar", "must be below the speed of light");
  }
  require(mesh.a > 0.0, "mesh.a", "must be positive");
  require(mesh.b > 0.0, "mesh.b", "must be positive");
  require(mesh.Z > 0.0, "mesh.Z", "must be positive");
  require(mesh.nx >= 3, "mesh.nx", "needs at least 3 nodes");
  require(mesh.ny >= 3, "mesh.ny", "needs at least 3 nodes");
  require(mesh.nzeta >= 3, "mesh.nzeta", "needs at least 3 nodes");
  require(hierarchy.n_max >= 0 && hierarchy.n_max <= 8, "hierarchy.n_max", "must lie in [0, 8]");
  require(hierarchy.tolerance > 0.0 && hierarchy.tolerance < 1.0, "hierarchy.tolerance",
          "must lie in (0, 1)");
  require(hierarchy.max_fixed_point >= 1, "hierarchy.max_fixed_point", "must be at least 1");
  require(sources.dt > 0.0, "sources.dt", "must be positive");
  require(sources.steps >= 0, "sources.steps", "must be non-negative");
  require(pic.N >= 1, "pic.N", "needs at least one particle");
  require(pic.dt > 0.0, "pic.dt", "must be positive");
  require(pic.steps >= 0, "pic.steps", "must be non-negative");
  require(pic.total_charge > 0.0, "pic.total_charge", "must be positive");
  try {
    pic_config().sampling.validate(*build_mesh());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("pic", e.what());
  }
  require(known_mms_case(verify.mms_case), "verify.case",
          "unknown case '" + verify.mms_case + "'");
  require(verify.intervals.size() >= 3, "verify.intervals", "needs at least 3 grids");
  for (std::size_t i = 0; i < verify.intervals.size(); ++i) {
    require(verify.intervals[i] >= 4, "verify.intervals", "each grid needs at least 4 intervals");
    if (i) require(verify.intervals[i] > verify.intervals[i - 1], "verify.intervals", "must increase");
  }
  require(verify.etas.size() >= 3, "verify.etas", "needs at least 3 values");
  for (std::size_t i = 0; i < verify.etas.size(); ++i) {
    require(verify.etas[i] > 0.0 && verify.etas[i] < 1.0, "verify.etas", "values must lie in (0, 1)");
    if (i) require(verify.etas[i] < verify.etas[i - 1], "verify.etas", "must decrease");
  }
  require(verify.eta_intervals_perp >= 4 && verify.eta_intervals_perp % 2 == 0,
          "verify.eta_intervals_perp", "must be even and at least 4");
  require(verify.eta_intervals_zeta >= 4 && verify.eta_intervals_zeta % 2 == 0,
          "verify.eta_intervals_zeta", "must be even and at least 4");
  require(!output.directory.empty(), "output.directory", "must not be empty");
  require(output.cadence >= 1, "output.cadence", "must be at least 1");
}

RunConfig parse_config_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
  }
  const auto secs = sections();
  /// Empty sections do not survive read_ini, so headers are checked on the text.
  std::set<std::string> headers;
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      const std::string t = trim(line);
      if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
      const std::string sec = trim(t.substr(1, t.size() - 2));
      if (std::find(secs.begin(), secs.end(), sec) == secs.end()) {
        const std::string hint = suggest(sec, secs);
        throw ConfigError(sec, "unknown section" + (hint.empty() ? "" : "; did you mean [" + hint + "]?"));
      }
      headers.insert(sec);
    }
  }
  RunConfig c;
  std::set<std::string> seen;
  for (const auto& [sec, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(sec, "key outside any [section]");
    if (std::find(secs.begin(), secs.end(), sec) == secs.end()) {
      const std::string hint = suggest(sec, secs);
      throw ConfigError(sec, "unknown section" + (hint.empty() ? "" : "; did you mean [" + hint + "]?"));
    }
    std::vector<std::string> names;
    for (const auto& k : keys())
      if (k.section == sec) names.push_back(k.name);
    for (const auto& [name, value] : body) {
      const std::string full = sec + "." + name;
      const auto it = std::find_if(keys().begin(), keys().end(),
                                   [&](const Key& k) { return k.section == sec && k.name == name; });
      if (it == keys().end()) {
        const std::string hint = suggest(name, names);
        throw ConfigError(full, "unknown key" + (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
      }
      it->set(c, full, value.data());
      seen.insert(full);
    }
  }
  if (!headers.count("mesh")) throw ConfigError("mesh", "required block [mesh] missing");
  if (!seen.count("scaling.beta")) throw ConfigError("scaling.beta", "required key missing");
  c.validate();
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::string out, current;
  for (const auto& k : keys()) {
    const auto v = k.get(c);
    if (!v) continue;
    if (k.section != current) {
      if (!current.empty()) out += '\n';
      out += "[" + k.section + "]\n";
      current = k.section;
    }
    out += k.name + " = " + *v + "\n";
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace parax::io
