// harness.hpp: experiment orchestration: configs in, CSV tables and a JSON
// manifest out.
//
// Each experiment kind is a pipeline over the library modules with built-in
// assertions; a run writes its tables plus manifest.json into the output
// directory and reports every assertion in the result. Re-running a config
// with the same seed reproduces every output byte for byte.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mk/bath.hpp"
#include "mk/config.hpp"
#include "mk/errors.hpp"

namespace mk::harness {

enum class Kind {
  bath_corr,
  stability,
  evolve_lindblad,
  evolve_fp,
  wigner,
  classical_limit,
  ordering_sweep,
  gme_compare,
  chain_oracle,
  secular_check,
};

// Hyphenated CLI names ("bath-corr", "evolve-fp", ...).
Kind kind_from_name(const std::string& name);
std::string kind_name(Kind kind);
const std::vector<std::string>& kind_names();

// A parsed configuration plus its resolution trail: every parameter read
// through the typed getters lands in `resolved`, defaults included, and the
// manifest records exactly that set.
struct ExperimentConfig {
  Kind kind = Kind::stability;
  Config values;
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  mutable Config resolved;

  double number(const std::string& key) const;  // throws when missing
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::vector<double> list(const std::string& key,
                           std::vector<double> fallback) const;
  std::filesystem::path resolve_path(const std::string& value) const;
};

// Reads the file, checks any `kind` key against the requested kind, and pulls
// `seed` and `out` (default runs/<kind>). Referenced files are checked when
// the pipeline resolves them.
ExperimentConfig load_experiment(Kind kind,
                                 const std::filesystem::path& config_path);
ExperimentConfig make_experiment(Kind kind, Config values,
                                 const std::filesystem::path& base_dir = ".");

// Bath selected by the `bath` key: "classical-gauss" is the symmetric-domain
// coupling u = amp * w * exp(-(w/scale)^2 / 2); "quantum-gauss" couples
// eps = amp * sqrt(w) * exp(-w^2 / (2 scale^2)) against a flat unit spectral
// density; "table" loads bath_table with bath_domain. All use `beta`.
bath::BathSpec bath_from_config(const ExperimentConfig& config);

struct Assertion {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  std::string comparison;  // "<=" or ">="
  bool pass = false;
};

struct RunResult {
  Kind kind = Kind::stability;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> tables;
  std::filesystem::path manifest;
  std::vector<Assertion> assertions;
  bool ok = false;
};

RunResult run_experiment(const ExperimentConfig& config);

// One hbar of the classical-limit sweep; distances compare the evolved
// ordering-dependent field against the hbar = 0 reference on the same grid.
struct LimitRow {
  double hbar = 0.0;
  int dim = 0;             // Fock truncation of the transform route, 0 if skipped
  double sup_dist = 0.0;
  double l1_dist = 0.0;
  double fock_dist = -1.0;  // transform route vs PDE route, -1 if skipped
};
struct LimitTable {
  std::vector<LimitRow> rows;
  std::vector<double> ratios;  // consecutive sup_dist ratios
  double slope = 0.0;          // least-squares d ln sup_dist / d ln hbar
};
LimitTable classical_limit_sweep(const ExperimentConfig& config);

struct OrderingRow {
  double hbar = 0.0;
  double a_lo = 0.0, a_hi = 0.0;
  double sup_dist = 0.0;
};
struct OrderingTable {
  std::vector<OrderingRow> rows;
  std::vector<double> ratios;      // per-pair ratios across halved hbar entries
  double zero_mismatch = 0.0;      // coefficient spread across a at hbar = 0
  double grid_error = -1.0;        // coarse-grid Richardson estimate, -1 if off
  double min_leading_dist = 0.0;   // smallest pairwise distance at largest hbar
};
OrderingTable ordering_sweep(const ExperimentConfig& config);

}  // namespace mk::harness
