#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nncis/atlas.hpp"
#include "nncis/mpc.hpp"

namespace nncis {

struct LaneKeepingParams {
  double l1 = 5.0;
  double l2 = 2.0;
  double w = 3.5;
  double v = 6.0;
  double dt = 0.1;
  double u_max_deg = 5.0;
  /// d_min = (w - l2) / divisor.
  int divisor = 32;
};

/// Problem data for synthesis: state grid, control domain and safe set.
struct Scenario {
  Eigen::VectorXd state_lower;
  Eigen::VectorXd state_upper;
  ControlDomain control;
  double d_min = 0.0;
  std::vector<RealBox> safe_boxes;
  std::vector<Halfspace> safe_halfspaces;
  std::optional<LaneKeepingParams> lane_keeping;

  GridSpec grid() const { return make_grid(state_lower, state_upper, d_min); }
  /// Quantized safe set (boxes take precedence over halfspaces).
  BoxSet safe_set() const;
};

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

ControlAtlas atlas_from_json_text(const std::string& text);
std::string atlas_to_json_text(const ControlAtlas& atlas);
ControlAtlas load_atlas(const std::filesystem::path& path);
void save_atlas(const ControlAtlas& atlas, const std::filesystem::path& path);

/// Reference table `step,xr0..`; rows are expanded with last-value hold.
std::vector<Eigen::VectorXd> load_reference_csv(const std::filesystem::path& path, int n_x);
std::string trajectory_to_csv(const Trajectory& t);
void save_trajectory_csv(const Trajectory& t, const std::filesystem::path& path);

/// Parses "a,b,c" (commas and/or whitespace) into a vector.
Eigen::VectorXd parse_vector(const std::string& text);

}  // namespace nncis
