#include "cfmimo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cfmimo/config_parse.hpp"

namespace cfmimo {

void ScenarioConfig::validate() const {
  if (!(area_side > 0.0)) throw std::invalid_argument("config: area_side must be positive");
  if (k_ues < 1) throw std::invalid_argument("config: k_ues must be >= 1");
  if (!(carrier_hz > 0.0) || !(bandwidth_hz > 0.0)) {
    throw std::invalid_argument("config: carrier and bandwidth must be positive");
  }
  if (!(ap_power_w > 0.0) || !(ue_power_w > 0.0)) {
    throw std::invalid_argument("config: transmit powers must be positive");
  }
  if (tau_up < 1) throw std::invalid_argument("config: tau_up must be >= 1");
  if (tau_dp < 0) throw std::invalid_argument("config: tau_dp must be >= 0");
  if (tau_dd < 0) throw std::invalid_argument("config: tau_dd must be >= 0");
  if (v_max < 0.0) throw std::invalid_argument("config: v_max must be nonnegative");
  if (topology == Topology::kCellFree) {
    if (m_aps < 1 || l_antennas < 1) {
      throw std::invalid_argument("config: m_aps and l_antennas must be >= 1");
    }
    if (m_aps * l_antennas < 2 * k_ues) {
      throw std::invalid_argument("config: need m_aps*l_antennas >= 2*k_ues");
    }
    if (tau_dp > 0 && static_cast<long>(tau_up) * tau_dp < k_ues) {
      throw std::invalid_argument("config: need tau_up*tau_dp >= k_ues when tau_dp > 0");
    }
  } else {
    if (cells < 1 || bs_antennas < 1 || ues_per_cell < 1) {
      throw std::invalid_argument("config: cells, bs_antennas, ues_per_cell must be >= 1");
    }
    if (cells * ues_per_cell != k_ues) {
      throw std::invalid_argument("config: cells*ues_per_cell must equal k_ues");
    }
    if (bs_antennas < 2 * ues_per_cell) {
      throw std::invalid_argument("config: need bs_antennas >= 2*ues_per_cell");
    }
  }
}

std::vector<Point> place_aps_grid(int count, double area_side) {
  if (count < 1) throw std::invalid_argument("place_aps_grid: count must be >= 1");
  if (!(area_side > 0.0)) throw std::invalid_argument("place_aps_grid: area must be positive");
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const int rows = (count + cols - 1) / cols;
  const double w = area_side / cols;
  const double h = area_side / rows;
  std::vector<Point> pts;
  pts.reserve(count);
  for (int i = 0; i < rows && static_cast<int>(pts.size()) < count; ++i) {
    for (int j = 0; j < cols && static_cast<int>(pts.size()) < count; ++j) {
      pts.push_back({(j + 0.5) * w, (i + 0.5) * h});
    }
  }
  return pts;
}

std::vector<Point> place_ues_uniform(int count, double area_side, Rng& rng) {
  if (count < 0) throw std::invalid_argument("place_ues_uniform: negative count");
  std::vector<Point> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double x = rng.uniform(0.0, area_side);
    const double y = rng.uniform(0.0, area_side);
    pts.push_back({x, y});
  }
  return pts;
}

double large_scale_fading(double dist_m, double shadow_draw, const PropagationModel& pm) {
  if (dist_m < 0.0) throw std::invalid_argument("large_scale_fading: negative distance");
  const double d = std::max(dist_m, pm.min_dist_m);
  const double db =
      pm.ref_loss_db - pm.slope_db_per_decade * std::log10(d) + pm.shadow_std_db * shadow_draw;
  return std::pow(10.0, db / 10.0);
}

double ap_ue_distance(const Point& ap, const Point& ue, const PropagationModel& pm) {
  const double dx = ap.x - ue.x;
  const double dy = ap.y - ue.y;
  return std::sqrt(dx * dx + dy * dy + pm.height_m * pm.height_m);
}

NormalizedSnrs normalized_snrs(const ScenarioConfig& config) {
  const double n0_dbm = -174.0 + 10.0 * std::log10(config.bandwidth_hz) + config.noise_figure_db;
  const double ue_dbm = 10.0 * std::log10(config.ue_power_w * 1e3);
  const double ap_dbm = 10.0 * std::log10(config.ap_power_w * 1e3);
  NormalizedSnrs s;
  s.e_up = std::pow(10.0, (ue_dbm - n0_dbm) / 10.0);
  s.e_dp = std::pow(10.0, (ap_dbm - n0_dbm) / 10.0);
  s.e_d = s.e_dp;
  return s;
}

namespace {

void fill_fading(Deployment& dep, uint64_t seed, const PropagationModel& pm) {
  const int m = static_cast<int>(dep.ap_positions.size());
  const int k = static_cast<int>(dep.ue_positions.size());
  dep.beta = Mat(m, k);
  Rng shadow_rng(mix_seed(seed, 2));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      const double d = ap_ue_distance(dep.ap_positions[i], dep.ue_positions[j], pm);
      dep.beta(i, j) = large_scale_fading(d, shadow_rng.gaussian(), pm);
    }
  }
}

}  // namespace

Deployment build_cellfree(const ScenarioConfig& config, uint64_t seed,
                          const PropagationModel& pm) {
  config.validate();
  if (config.topology != Topology::kCellFree) {
    throw std::invalid_argument("build_cellfree: config topology is not cell-free");
  }
  Deployment dep;
  dep.ap_positions = place_aps_grid(config.m_aps, config.area_side);
  Rng ue_rng(mix_seed(seed, 1));
  dep.ue_positions = place_ues_uniform(config.k_ues, config.area_side, ue_rng);
  dep.velocities.assign(config.k_ues, config.v_max);
  dep.l_antennas = config.l_antennas;
  fill_fading(dep, seed, pm);
  const auto snr = normalized_snrs(config);
  dep.e_up = snr.e_up;
  dep.e_dp = snr.e_dp;
  dep.e_d = snr.e_d;
  return dep;
}

Deployment build_cellular(const ScenarioConfig& config, uint64_t seed,
                          const PropagationModel& pm) {
  config.validate();
  if (config.topology != Topology::kCellular) {
    throw std::invalid_argument("build_cellular: config topology is not cellular");
  }
  const int lc = config.cells;
  // Equal-area partition: rows is the largest divisor of lc not above sqrt(lc).
  int rows = 1;
  for (int r = static_cast<int>(std::sqrt(static_cast<double>(lc))); r >= 1; --r) {
    if (lc % r == 0) {
      rows = r;
      break;
    }
  }
  const int cols = lc / rows;
  const double w = config.area_side / cols;
  const double h = config.area_side / rows;

  Deployment dep;
  dep.ap_positions.reserve(lc);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      dep.ap_positions.push_back({(j + 0.5) * w, (i + 0.5) * h});
    }
  }
  Rng ue_rng(mix_seed(seed, 1));
  dep.ue_positions.reserve(config.k_ues);
  dep.serving_cell.reserve(config.k_ues);
  for (int cell = 0; cell < lc; ++cell) {
    const int ci = cell / cols, cj = cell % cols;
    for (int u = 0; u < config.ues_per_cell; ++u) {
      const double x = ue_rng.uniform(cj * w, (cj + 1) * w);
      const double y = ue_rng.uniform(ci * h, (ci + 1) * h);
      dep.ue_positions.push_back({x, y});
      dep.serving_cell.push_back(cell);
    }
  }
  dep.velocities.assign(config.k_ues, config.v_max);
  dep.l_antennas = config.bs_antennas;
  dep.ues_per_cell = config.ues_per_cell;
  fill_fading(dep, seed, pm);
  const auto snr = normalized_snrs(config);
  dep.e_up = snr.e_up;
  dep.e_dp = snr.e_dp;
  dep.e_d = snr.e_d;
  return dep;
}

bool apply_scenario_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "name") {
    cfg.name = value;
  } else if (key == "topology") {
    if (value == "cellfree" || value == "cell-free") {
      cfg.topology = Topology::kCellFree;
    } else if (value == "cellular") {
      cfg.topology = Topology::kCellular;
    } else {
      throw std::invalid_argument("config: unknown topology '" + value + "'");
    }
  } else if (key == "area_side") {
    cfg.area_side = parse_double(key, value);
  } else if (key == "m_aps") {
    cfg.m_aps = parse_int(key, value);
  } else if (key == "l_antennas") {
    cfg.l_antennas = parse_int(key, value);
  } else if (key == "cells") {
    cfg.cells = parse_int(key, value);
  } else if (key == "bs_antennas") {
    cfg.bs_antennas = parse_int(key, value);
  } else if (key == "ues_per_cell") {
    cfg.ues_per_cell = parse_int(key, value);
  } else if (key == "k_ues") {
    cfg.k_ues = parse_int(key, value);
  } else if (key == "carrier_hz") {
    cfg.carrier_hz = parse_double(key, value);
  } else if (key == "bandwidth_hz") {
    cfg.bandwidth_hz = parse_double(key, value);
  } else if (key == "noise_figure_db") {
    cfg.noise_figure_db = parse_double(key, value);
  } else if (key == "ap_power_w") {
    cfg.ap_power_w = parse_double(key, value);
  } else if (key == "ue_power_w") {
    cfg.ue_power_w = parse_double(key, value);
  } else if (key == "tau_up") {
    cfg.tau_up = parse_int(key, value);
  } else if (key == "tau_dp") {
    cfg.tau_dp = parse_int(key, value);
  } else if (key == "tau_dd") {
    cfg.tau_dd = parse_int(key, value);
  } else if (key == "v_max") {
    cfg.v_max = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else {
    return false;
  }
  return true;
}

ScenarioConfig parse_scenario_config(const std::string& text) {
  ScenarioConfig cfg;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (!apply_scenario_key(cfg, key, value)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config(ss.str());
}

}  // namespace cfmimo
