#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parax/frames.hpp"
#include "parax/pic.hpp"

namespace parax::io {

/// Raised for malformed or invalid configuration; `key` is "section.name".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Raised for filesystem failures; the message names the path.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScalingMode { dimensionless, physical };
enum class SourceKind { zero, quasi_static, static_mode };

struct ScalingBlock {
  ScalingMode mode = ScalingMode::dimensionless;
  double beta = 0.5;
  double eta = 0.1;   ///< dimensionless mode
  double l = 0.01;    ///< physical mode [m]
  double vbar = 0.0;  ///< physical mode [m/s]

  bool operator==(const ScalingBlock&) const = default;
};

struct MeshBlock {
  double a = 1.0, b = 1.0, Z = 1.0;
  int nx = 33, ny = 33, nzeta = 17;

  bool operator==(const MeshBlock&) const = default;
};

struct HierarchyBlock {
  int n_max = 1;
  double tolerance = 1e-10;
  int max_fixed_point = 20;

  bool operator==(const HierarchyBlock&) const = default;
};

/// Analytic sources for the `fields` and `residual` verbs, solved at
/// t = k dt for k = 0..steps.
struct SourcesBlock {
  SourceKind kind = SourceKind::zero;
  double dt = 0.1;
  int steps = 0;

  bool operator==(const SourcesBlock&) const = default;
};

struct PicBlock {
  pic::Family family = pic::Family::uniform_ellipse;
  std::size_t N = 1000;
  std::uint64_t seed = 1;
  double dt = 0.05;
  int steps = 10;
  double charge = 1.0;
  std::optional<double> cx, cy;
  double rx = 0.25, ry = 0.25;
  double zeta_lo = 0.25, zeta_hi = 0.75;
  double zeta_mean = 0.5, zeta_sigma = 0.1;
  double vx = 0.0, vy = 0.0, vzeta = 0.0;
  double v_sigma_perp = 0.0, v_sigma_zeta = 0.0;
  double total_charge = 1.0;

  bool operator==(const PicBlock&) const = default;
};

struct ExternalBlock {
  double bx = 0.0, by = 0.0, bz = 0.0;

  bool operator==(const ExternalBlock&) const = default;
};

struct VerifyBlock {
  /// MMS case id or convergence target for the `mms` verb.
  std::string mms_case = "ez-mode-111";
  std::vector<int> intervals{16, 24, 32};
  /// Eta sweep and grids for the `convergence` verb.
  std::vector<double> etas{0.2, 0.1, 0.05};
  int eta_intervals_perp = 32;
  int eta_intervals_zeta = 16;

  bool operator==(const VerifyBlock&) const = default;
};

struct OutputBlock {
  std::string directory = "parax_out";
  int cadence = 1;

  bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
  ScalingBlock scaling;
  MeshBlock mesh;
  HierarchyBlock hierarchy;
  SourcesBlock sources;
  PicBlock pic;
  ExternalBlock external;
  VerifyBlock verify;
  OutputBlock output;

  bool operator==(const RunConfig&) const = default;

  /// Throws ConfigError naming the first offending key.
  void validate() const;
  double eta() const;
  frames::ScalingParameters scaling_parameters() const;
  grid::MeshPtr build_mesh() const;
  hierarchy::HierarchySettings hierarchy_settings() const;
  hierarchy::ExternalField external_field() const;
  pic::PicConfig pic_config() const;
};

/// INI text: `[section]` headers, `key = value` lines, `#` or `;` comments.
/// Unknown sections and keys are rejected with the closest known name; the
/// mesh block and scaling.beta are required.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);
/// Canonical text with every key; parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& c);

std::string to_string(ScalingMode m);
std::string to_string(SourceKind k);

/// 64-bit FNV-1a over the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Closest candidate by edit distance, or empty when none is near.
std::string suggest(const std::string& word, const std::vector<std::string>& candidates);

/// Node-ordered field dump with columns x,y,zeta,Ez,Bz,Ex,Ey,Bx,By,Ecal_x,Ecal_y.
std::string field_order_csv(const hierarchy::FieldOrder& f);

/// Collects artifacts in memory and writes them in `write_outputs`.
struct Artifacts {
  std::string verb;
  std::string config_text;
  /// File name -> content, written in name order.
  std::map<std::string, std::string> files;
  /// Arbitrary JSON text recorded in the manifest under "results".
  std::string results_json = "{}";
  /// False when a verification verb missed its target order (exit status 4).
  bool passed = true;

  /// `{kind}_{order}_{step}.csv`
  static std::string csv_name(const std::string& kind, const std::string& order, int step);
};

/// Writes every file through a temporary name and renames it; manifest.json
/// (config, hash, version, file list, results) is written last. Throws
/// OutputError with the path on failure; no manifest is left behind then.
void write_outputs(const Artifacts& a, const std::filesystem::path& dir);

enum class Verb { fields, pic, mms, residual, convergence };
Verb parse_verb(const std::string& s);
std::string to_string(Verb v);

struct RunOptions {
  std::filesystem::path out;
  bool quiet = false;
};

/// Runs the verb and writes artifacts. Returns 0 on success. On failure a
/// structured error report (JSON) goes to `err` and, when the directory is
/// writable, to `{out}/error.json`; the return value is then nonzero.
int run_command(Verb verb, const RunConfig& cfg, const RunOptions& opt, std::ostream& log,
                std::ostream& err);

/// Builds the artifacts without touching the filesystem.
Artifacts execute(Verb verb, const RunConfig& cfg, std::ostream* log = nullptr);

std::string version();

}  // namespace parax::io
