// Command-line front end: run experiment specs, reproduce the figure suite,
// and run the Monte-Carlo oracle / invariant self-checks.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfmimo/cellfree.hpp"
#include "cfmimo/cellular.hpp"
#include "cfmimo/harness.hpp"
#include "cfmimo/montecarlo.hpp"
#include "cfmimo/numerics.hpp"
#include "cfmimo/pilots.hpp"

namespace {

using namespace cfmimo;

struct CommonOpts {
  std::string out_dir = "results";
  std::string format = "csv";
  uint64_t seed = 0;       // 0: keep the spec's seed
  int threads = 1;
  int realizations = 0;    // 0: keep the spec's count
};

OutFormat parse_format(const std::string& f) {
  if (f == "csv") return OutFormat::kCsv;
  if (f == "json") return OutFormat::kJson;
  if (f == "both") return OutFormat::kBoth;
  throw CLI::ValidationError("--format must be csv, json or both");
}

void apply_overrides(ExperimentSpec& spec, const CommonOpts& opts) {
  if (opts.seed != 0) spec.base.seed = opts.seed;
  if (opts.realizations > 0) spec.realizations = opts.realizations;
}

int run_specs(std::vector<ExperimentSpec> specs, const CommonOpts& opts) {
  const OutFormat format = parse_format(opts.format);
  int status = 0;
  for (auto& spec : specs) {
    apply_overrides(spec, opts);
    std::printf("running %-24s (%d realizations, %zu sweep values, %zu schemes)\n",
                spec.name.c_str(), spec.realizations,
                std::max<size_t>(spec.sweep_values.size(), 1), spec.schemes.size());
    std::fflush(stdout);
    const SEReport report = run_experiment(spec, opts.threads);
    const auto files = emit_results(report, opts.out_dir, format);
    std::printf("  done in %.1f s:", report.runtime_s);
    for (const auto& f : files) std::printf(" %s", f.string().c_str());
    std::printf("\n");
    if (!report.oracle_terms.empty()) {
      const double worst = report.worst_oracle_z();
      std::printf("  oracle: %zu terms, worst |z| = %.2f\n", report.oracle_terms.size(), worst);
      if (worst > 3.0) {
        nlohmann::json record;
        record["suite"] = "run-oracle";
        record["experiment"] = spec.name;
        record["worst_z"] = worst;
        std::printf("%s\n", record.dump().c_str());
        status = 1;
      }
    }
  }
  return status;
}

// One pass/fail record; collected failures are dumped as JSON so that
// automation can consume oracle/selftest outcomes.
struct CheckLog {
  nlohmann::json failures = nlohmann::json::array();
  int total = 0;

  void check(bool ok, const std::string& name, const std::string& detail = "") {
    ++total;
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) {
      nlohmann::json f;
      f["name"] = name;
      f["detail"] = detail;
      failures.push_back(std::move(f));
    }
  }

  int finish(const char* what) {
    if (failures.empty()) {
      std::printf("%s: all %d checks passed\n", what, total);
      return 0;
    }
    nlohmann::json record;
    record["suite"] = what;
    record["failed"] = failures;
    std::printf("%s\n", record.dump().c_str());
    return 1;
  }
};

std::string fmt_terms(double closed, double estimate, double se) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "closed=%.6g est=%.6g se=%.2g", closed, estimate, se);
  return buf;
}

int run_oracle(long draws, uint64_t mc_seed, bool verbose) {
  CheckLog log;

  // Cell-free desk instance.
  {
    ScenarioConfig cfg = desk_cellfree_config();
    cfg.seed = 7;
    const Deployment dep = build_cellfree(cfg, cfg.seed);
    const PilotBook pilots = build_pilot_book(dep.beta, cfg.tau_up, cfg.tau_dp);
    EstimationStats stats =
        uplink_estimation_stats(dep.beta, pilots.up_gram, cfg.tau_up, dep.e_up);
    stats.eta = uniform_power_control(stats.gamma, cfg.l_antennas);
    const ChannelMoments moments = downlink_channel_moments(dep.beta, stats, cfg.l_antennas,
                                                            pilots, cfg.tau_dp, dep.e_dp);
    const std::vector<int> symbols = {0, 100, 400};
    const Mat rho = make_rho_table(std::vector<double>(cfg.k_ues, 45.0), cfg.carrier_hz,
                                   cfg.symbol_duration_s(), 401);
    const auto rep = run_cellfree_oracle(dep, pilots, stats, moments, symbols, rho, draws,
                                         mc_seed);
    const auto terms = cellfree_oracle_terms(rep, moments, rho);
    int worst_idx = 0;
    double worst = 0.0;
    int failures = 0;
    for (size_t i = 0; i < terms.size(); ++i) {
      const double z = std::abs(terms[i].z_score());
      if (z > worst) {
        worst = z;
        worst_idx = static_cast<int>(i);
      }
      if (z > 3.0) ++failures;
      if (verbose) {
        std::printf("  %-24s %s z=%+.2f\n", terms[i].name.c_str(),
                    fmt_terms(terms[i].closed_form, terms[i].estimate, terms[i].std_error).c_str(),
                    terms[i].z_score());
      }
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%zu terms, worst |z|=%.2f (%s)", terms.size(),
                  worst, terms[worst_idx].name.c_str());
    log.check(failures == 0, "cell-free expectation terms within 3 std errors", detail);

    double worst_rel = 0.0;
    for (size_t ni = 0; ni < symbols.size(); ++ni) {
      for (int k = 0; k < cfg.k_ues; ++k) {
        const double r = rho(k, symbols[ni]);
        const double closed_dt = sinr_downlink_training(moments, k, r, dep.e_d);
        const double mc_dt =
            oracle_sinr_downlink_training(rep, k, static_cast<int>(ni), r, dep.e_d);
        worst_rel = std::max(worst_rel, std::abs(mc_dt - closed_dt) / closed_dt);
        const double closed_sc = sinr_statistical_csi(moments, k, r, dep.e_d);
        const double mc_sc = oracle_sinr_statistical_csi(rep, k, static_cast<int>(ni), dep.e_d);
        worst_rel = std::max(worst_rel, std::abs(mc_sc - closed_sc) / closed_sc);
      }
    }
    char d2[96];
    std::snprintf(d2, sizeof(d2), "worst relative gap %.3f%%", 100.0 * worst_rel);
    log.check(worst_rel < 0.03, "cellfree SINR closed forms vs Monte-Carlo assembly", d2);
  }

  // Cellular desk instance.
  {
    ScenarioConfig cfg = desk_cellular_config();
    cfg.seed = 7;
    const Deployment dep = build_cellular(cfg, cfg.seed);
    const CellularStats stats = build_cellular_stats(dep, cfg.tau_up, cfg.tau_dp);
    const CellularSinrTerms terms = cellular_sinr_terms(stats);
    const std::vector<int> symbols = {0, 100, 400};
    const Mat rho = make_rho_table(std::vector<double>(cfg.k_ues, 45.0), cfg.carrier_hz,
                                   cfg.symbol_duration_s(), 401);
    const auto rep = run_cellular_oracle(dep, stats, cfg.tau_up, cfg.tau_dp, symbols, rho,
                                         draws, mc_seed + 1);
    const auto oterms = cellular_oracle_terms(rep, stats, rho);
    int failures = 0;
    double worst = 0.0;
    for (const auto& t : oterms) {
      const double z = std::abs(t.z_score());
      worst = std::max(worst, z);
      if (z > 3.0) ++failures;
      if (verbose) {
        std::printf("  %-24s %s z=%+.2f\n", t.name.c_str(),
                    fmt_terms(t.closed_form, t.estimate, t.std_error).c_str(), t.z_score());
      }
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%zu terms, worst |z|=%.2f", oterms.size(), worst);
    log.check(failures == 0, "cellular expectation terms within 3 std errors", detail);

    double worst_rel = 0.0;
    for (size_t ni = 0; ni < symbols.size(); ++ni) {
      for (int u = 0; u < cfg.k_ues; ++u) {
        const double r = rho(u, symbols[ni]);
        const double closed_dt = cellular_sinr_downlink_training(terms, u, r, dep.e_d);
        const double mc_dt =
            cellular_oracle_sinr_downlink_training(rep, u, static_cast<int>(ni), r, dep.e_d);
        worst_rel = std::max(worst_rel, std::abs(mc_dt - closed_dt) / closed_dt);
        const double closed_sc = cellular_sinr_statistical_csi(terms, u, r, dep.e_d);
        const double mc_sc =
            cellular_oracle_sinr_statistical_csi(rep, u, static_cast<int>(ni), dep.e_d);
        worst_rel = std::max(worst_rel, std::abs(mc_sc - closed_sc) / closed_sc);
      }
    }
    char d2[96];
    std::snprintf(d2, sizeof(d2), "worst relative gap %.3f%%", 100.0 * worst_rel);
    log.check(worst_rel < 0.03, "cellular SINR closed forms vs Monte-Carlo assembly", d2);
  }

  return log.finish("oracle");
}

int run_selftest(int deployments, uint64_t seed) {
  CheckLog log;
  ScenarioConfig base = desk_cellfree_config();

  // Pilot-book structure over random deployments.
  bool pilots_ok = true;
  std::string pilot_detail;
  for (int r = 0; r < deployments; ++r) {
    const Deployment dep = build_cellfree(base, mix_seed(seed, r));
    try {
      build_pilot_book(dep.beta, base.tau_up, base.tau_dp).check_invariants();
    } catch (const std::exception& e) {
      pilots_ok = false;
      pilot_detail = e.what();
      break;
    }
  }
  log.check(pilots_ok, "pilot book invariants over random deployments", pilot_detail);

  // Power constraint tight at every AP.
  bool power_ok = true;
  for (int r = 0; r < deployments && power_ok; ++r) {
    const Deployment dep = build_cellfree(base, mix_seed(seed, 1000 + r));
    const PilotBook pilots = build_pilot_book(dep.beta, base.tau_up, base.tau_dp);
    EstimationStats stats =
        uplink_estimation_stats(dep.beta, pilots.up_gram, base.tau_up, dep.e_up);
    stats.eta = uniform_power_control(stats.gamma, base.l_antennas);
    for (int m = 0; m < dep.beta.rows(); ++m) {
      double budget = 0.0;
      for (int k = 0; k < dep.beta.cols(); ++k) budget += stats.eta(m, k) * stats.gamma(m, k);
      if (std::abs(budget - 1.0 / base.l_antennas) > 1e-12) power_ok = false;
    }
  }
  log.check(power_ok, "full-power constraint tight at every AP");

  // Trained SINR dominates the statistical-CSI SINR for every UE and symbol.
  bool dominance_ok = true;
  for (int r = 0; r < deployments && dominance_ok; ++r) {
    const Deployment dep = build_cellfree(base, mix_seed(seed, 2000 + r));
    const PilotBook pilots = build_pilot_book(dep.beta, base.tau_up, base.tau_dp);
    EstimationStats stats =
        uplink_estimation_stats(dep.beta, pilots.up_gram, base.tau_up, dep.e_up);
    stats.eta = uniform_power_control(stats.gamma, base.l_antennas);
    const ChannelMoments moments = downlink_channel_moments(dep.beta, stats, base.l_antennas,
                                                            pilots, base.tau_dp, dep.e_dp);
    const Mat rho = make_rho_table(std::vector<double>(base.k_ues, 45.0), base.carrier_hz,
                                   base.symbol_duration_s(), 500);
    for (int k = 0; k < base.k_ues; ++k) {
      for (int n = 0; n < 500; n += 50) {
        const double dt = sinr_downlink_training(moments, k, rho(k, n), dep.e_d);
        const double sc = sinr_statistical_csi(moments, k, rho(k, n), dep.e_d);
        if (!(dt >= sc * (1.0 - 1e-12))) dominance_ok = false;
      }
    }
  }
  log.check(dominance_ok, "downlink-training SINR dominates statistical-CSI SINR");

  // Determinism of the experiment pipeline.
  {
    ExperimentSpec spec;
    spec.name = "selftest";
    spec.base = base;
    spec.base.tau_dd = 100;
    spec.schemes = {Scheme::kCfDt, Scheme::kCfScsi};
    spec.realizations = 5;
    spec.sweep = SweepKind::kVmax;
    spec.sweep_values = {"5", "85"};
    const SEReport a = run_experiment(spec, 1);
    const SEReport b = run_experiment(spec, 2);
    bool same = a.cells.size() == b.cells.size();
    for (size_t i = 0; same && i < a.cells.size(); ++i) {
      same = a.cells[i].per_ue_avg_se == b.cells[i].per_ue_avg_se &&
             a.cells[i].p90 == b.cells[i].p90 && a.cells[i].mean_sum == b.cells[i].mean_sum;
    }
    log.check(same, "experiment pipeline deterministic and thread-count independent");
  }

  return log.finish("selftest");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Downlink spectral-efficiency simulator for cell-free and cellular massive "
               "MIMO under user mobility"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string spec_path, figure_token, scale_token = "desk";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "csv | json | both");
    cmd->add_option("--seed", opts.seed, "override the base seed");
    cmd->add_option("--threads", opts.threads, "worker threads across realizations");
    cmd->add_option("--realizations", opts.realizations, "override the realization count");
  };

  CLI::App* run = app.add_subcommand("run", "run an experiment spec file");
  run->add_option("spec", spec_path, "experiment spec file")->required();
  add_common(run);

  CLI::App* figure = app.add_subcommand("figure", "run a preconfigured figure experiment set");
  figure->add_option("id", figure_token, "figure id: f4 f5 f6ab f7 f8 f9ab f10ab")->required();
  figure->add_option("--scale", scale_token, "desk | paper");
  add_common(figure);

  long oracle_draws = 100000;
  uint64_t oracle_seed = 1009;
  bool oracle_verbose = false;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "validate the closed forms against the Monte-Carlo simulator");
  oracle->add_option("--draws", oracle_draws, "ensemble size");
  oracle->add_option("--seed", oracle_seed, "Monte-Carlo seed");
  oracle->add_flag("--verbose", oracle_verbose, "print every term");

  int self_deployments = 100;
  uint64_t self_seed = 99;
  CLI::App* selftest = app.add_subcommand("selftest", "run the invariant suite");
  selftest->add_option("--deployments", self_deployments, "random deployments to audit");
  selftest->add_option("--seed", self_seed, "audit seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_specs({load_experiment_spec(spec_path)}, opts);
    }
    if (figure->parsed()) {
      return run_specs(
          figure_suite(parse_figure_id(figure_token), parse_figure_scale(scale_token)), opts);
    }
    if (oracle->parsed()) {
      return run_oracle(oracle_draws, oracle_seed, oracle_verbose);
    }
    if (selftest->parsed()) {
      return run_selftest(self_deployments, self_seed);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
