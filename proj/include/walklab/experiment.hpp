#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "walklab/io.hpp"
#include "walklab/limit_laws.hpp"
#include "walklab/regime.hpp"

namespace walklab {

// Parsed experiment description. `params` and `tolerances` are the raw
// JSON blocks (kept as text so this header stays light).
struct ExperimentConfig {
  std::string kind;  // stable-check | walk-check | limit-law | bpre-regime |
                     // small-deviation | tcond | b2-check
  std::string sub;   // kind-specific mode (e.g. walk: renewal|kernel|conditioned)
  std::uint64_t seed = 0;
  std::size_t partitions = 0;  // mandatory, like the seed
  std::string out_dir;
  std::string cache_dir;
  std::string params_json = "{}";
  std::string tolerances_json = "{}";
};

ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

// Every check is normalized to `statistic <= threshold`. `table` and
// `mode` say how to recompute the statistic from the persisted CSV alone:
//   ks                      (columns point, empirical, reference)
//   max_abs_diff:c1:c2      max_i |c1 - c2|
//   rel_diff:c1:c2          max_i |c1 - c2| / |c1|
//   monotone:c              max_i (c_{i-1} - c_i), violations positive
//   max:c                   max_i c
//   value:c                 single-row column value
struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string table;
  std::string mode;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CheckResult> checks;
  std::map<std::string, Csv> tables;
  std::string meta_json = "{}";  // replica counts, wallclock, provenance
  bool all_pass = true;
  double wallclock_seconds = 0.0;
  std::size_t replicas = 0;
};

// Dispatches on config.kind, partitions the budget over counter-based
// substreams, aggregates deterministically and evaluates pass/fail.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Writes config.json, every table, report.json, then manifest.json last.
// Returns the manifest path.
std::filesystem::path write_report(const ExperimentReport& report,
                                   const std::filesystem::path& dir);

// Recompute the pass/fail verdict of a written report from its persisted
// tables alone (no resimulation).
bool replay_verdict(const std::filesystem::path& dir, std::string* why);

// Shared backing tables for the canonical alpha = 2 lattice family
// (lazy lattice p = 0.3). Built once with the configured budgets; all the
// limit-law criteria run against these.
struct CanonicalTables {
  IncrementFamily family;
  std::shared_ptr<const MeanderTable> meander_minus, meander_plus;
  std::shared_ptr<const BridgePositivityTable> bridge;
  std::shared_ptr<const DensityEvaluator> density;
  std::shared_ptr<const RenewalTable> vplus, vminus;
  LimitConstants constants;
  std::shared_ptr<const LimitLawEval> laws;
  std::string provenance_json;
};

struct CanonicalConfig {
  double lattice_p = 0.3;
  std::size_t meander_steps = 10'000;
  std::size_t meander_samples = 40'000;
  std::size_t bridge_steps = 2'000;
  std::uint64_t seed = 0xCA7AB1E5;
  std::size_t threads = 8;
};

CanonicalTables build_canonical_tables(const CanonicalConfig& cfg);

}  // namespace walklab
