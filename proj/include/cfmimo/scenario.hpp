#ifndef CFMIMO_SCENARIO_HPP
#define CFMIMO_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfmimo/matrix.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

enum class Topology { kCellFree, kCellular };

struct Point {
  double x = 0.0, y = 0.0;
};

// All physical and frame parameters of a network instance.
struct ScenarioConfig {
  std::string name = "scenario";
  Topology topology = Topology::kCellFree;
  double area_side = 1000.0;  // m

  // cell-free: m_aps APs with l_antennas each
  int m_aps = 100;
  int l_antennas = 4;
  // cellular: cells BSs with bs_antennas each serving ues_per_cell UEs
  int cells = 4;
  int bs_antennas = 100;
  int ues_per_cell = 10;

  int k_ues = 40;  // total UE count

  double carrier_hz = 2e9;
  double bandwidth_hz = 1e6;
  double noise_figure_db = 9.0;
  double ap_power_w = 0.2;
  double ue_power_w = 0.1;

  int tau_up = 10;
  int tau_dp = 10;
  int tau_dd = 500;

  double v_max = 5.0;  // m/s
  uint64_t seed = 1;

  double symbol_duration_s() const { return 1.0 / bandwidth_hz; }

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

// Pathloss / shadowing constants. The defaults are a standard urban model
// with an elevated AP; they are configuration, not ground truth.
struct PropagationModel {
  double ref_loss_db = -30.5;      // loss at the 1 m reference distance
  double slope_db_per_decade = 36.7;
  double shadow_std_db = 4.0;
  double height_m = 10.0;          // AP/BS height above UE plane
  double min_dist_m = 1.0;
};

// Normalized transmit SNRs (linear, unitless).
struct NormalizedSnrs {
  double e_up = 0.0, e_dp = 0.0, e_d = 0.0;
};

// A realized network: transmitter/UE geometry plus large-scale fading.
struct Deployment {
  std::vector<Point> ap_positions;  // APs (cell-free) or BSs (cellular)
  std::vector<Point> ue_positions;
  Mat beta;                         // [M (or cells) x K], linear scale
  std::vector<double> velocities;   // per UE, m/s
  double e_up = 0.0, e_dp = 0.0, e_d = 0.0;
  int l_antennas = 1;               // antennas per AP, or per BS for cellular
  // cellular only:
  std::vector<int> serving_cell;    // per UE; empty for cell-free
  int ues_per_cell = 0;
};

// Uniform grid of transmitter positions, each at the center of its grid
// cell. Non-square counts fall back to the smallest row-major rectangular
// grid covering `count` points.
std::vector<Point> place_aps_grid(int count, double area_side);

// K i.i.d. uniform positions over the square; deterministic given the rng.
std::vector<Point> place_ues_uniform(int count, double area_side, Rng& rng);

// Large-scale fading (linear) at 3-D distance `dist_m` with a standard
// normal shadowing draw.
double large_scale_fading(double dist_m, double shadow_draw,
                          const PropagationModel& pm = {});

// 3-D distance between a transmitter and a UE including the height offset.
double ap_ue_distance(const Point& ap, const Point& ue, const PropagationModel& pm = {});

NormalizedSnrs normalized_snrs(const ScenarioConfig& config);

Deployment build_cellfree(const ScenarioConfig& config, uint64_t seed,
                          const PropagationModel& pm = {});

// BSs at the centers of an equal-area rectangular partition of the square;
// UEs uniform within their serving cell.
Deployment build_cellular(const ScenarioConfig& config, uint64_t seed,
                          const PropagationModel& pm = {});

// Plain-text key = value config file. Unknown keys are an error.
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
ScenarioConfig parse_scenario_config(const std::string& text);

// Applies one key/value pair; returns false for keys the scenario does not
// own (the experiment-spec parser layers its keys on top).
bool apply_scenario_key(ScenarioConfig& cfg, const std::string& key, const std::string& value);

}  // namespace cfmimo

#endif
