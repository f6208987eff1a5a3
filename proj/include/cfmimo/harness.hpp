#ifndef CFMIMO_HARNESS_HPP
#define CFMIMO_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cfmimo/scenario.hpp"

namespace cfmimo {

enum class Scheme { kCfDt, kCfScsi, kCellDt, kCellScsi };

const char* scheme_label(Scheme s);
Scheme parse_scheme(const std::string& token);
bool scheme_is_cellular(Scheme s);

enum class SweepKind { kNone, kVmax, kTauDd, kPilotSplit, kDensification };

const char* sweep_kind_label(SweepKind k);

// One resolved sweep value: the base config with the override applied.
struct SweepPoint {
  std::string label;
  ScenarioConfig config;
};

struct ExperimentSpec {
  std::string name = "experiment";
  ScenarioConfig base;
  SweepKind sweep = SweepKind::kNone;
  std::vector<std::string> sweep_values;  // raw tokens, e.g. "45", "10:20"
  std::vector<Scheme> schemes;
  int realizations = 50;
  // When on, the run also validates the closed forms against a Monte-Carlo
  // ensemble on the first realization and stores the term table in the
  // result bundle.
  bool run_oracle = false;
};

ExperimentSpec parse_experiment_spec(const std::string& text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

// Applies each sweep token to the base config and validates the result.
std::vector<SweepPoint> resolve_sweep(const ExperimentSpec& spec);

// Aggregated outcome of one (scheme, sweep value) cell.
struct ResultCell {
  Scheme scheme = Scheme::kCfDt;
  std::string sweep_label;
  std::vector<double> per_ue_avg_se;  // realizations x K, realization-major
  std::vector<double> sum_se;         // per realization
  double p90 = 0.0;                   // 0.1-quantile: exceeded by 90% of UEs
  double mean_sum = 0.0;
};

// Pilot assignments of one realization, kept for reproducibility audits.
struct PilotAudit {
  std::string sweep_label;
  int realization = 0;
  std::vector<int> up_index, dp_index;
};

struct OracleAudit {
  std::string name;
  double closed_form = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct SEReport {
  std::string name;
  uint64_t seed = 0;
  std::string config_hash;
  double runtime_s = 0.0;
  int realizations = 0;
  int k_ues = 0;
  SweepKind sweep = SweepKind::kNone;
  std::vector<std::string> config_echo;  // key = value lines
  std::vector<Scheme> schemes;
  std::vector<std::string> point_labels;
  std::vector<ResultCell> cells;  // scheme-major: cells[s * points + p]
  std::vector<PilotAudit> pilot_books;
  std::vector<OracleAudit> oracle_terms;  // empty unless the spec asked for it

  const ResultCell& at(Scheme s, size_t point) const;
  // Worst |estimate - closed| / std_error over the oracle terms.
  double worst_oracle_z() const;
};

// Runs every (realization, sweep value, scheme) evaluation. Realizations are
// the only parallel axis; results land in preallocated per-realization slots
// so the report is independent of thread count.
SEReport run_experiment(const ExperimentSpec& spec, int threads = 1);

enum class OutFormat { kCsv, kJson, kBoth };

// One summary CSV and one raw CSV per scheme, plus a JSON bundle. Numbers
// are printed with 17 significant digits so parsing them back reproduces the
// in-memory values bit-exactly. Returns the written paths.
std::vector<std::filesystem::path> emit_results(const SEReport& report,
                                                const std::filesystem::path& dir,
                                                OutFormat format);

// Serialized spec text (also used for hashing).
std::string experiment_spec_text(const ExperimentSpec& spec);
std::string config_hash(const ExperimentSpec& spec);

enum class FigureId { kF4, kF5, kF6ab, kF7, kF8, kF9ab, kF10ab };
enum class FigureScale { kDesk, kPaper };

FigureId parse_figure_id(const std::string& token);
FigureScale parse_figure_scale(const std::string& token);

// Preconfigured experiment sets reproducing the figure suite. Desk scale is
// sized for CI-speed runs; paper scale uses the full-size network.
std::vector<ExperimentSpec> figure_suite(FigureId id, FigureScale scale);

// Desk/paper base configurations (exposed for tests and the acceptance run).
ScenarioConfig desk_cellfree_config();
ScenarioConfig paper_cellfree_config();
ScenarioConfig desk_cellular_config();
ScenarioConfig paper_cellular_config();

// Simple bounded worker pool over [0, count).
void parallel_for(long count, int threads, const std::function<void(long)>& body);

}  // namespace cfmimo

#endif
