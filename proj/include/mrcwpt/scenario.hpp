#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrcwpt/circuit.hpp"
#include "mrcwpt/coil_model.hpp"

namespace mrcwpt {

/// Run settings carried alongside a scenario; every field has a default.
struct ScenarioOptions {
  double dx = 1e-3;
  long itr_max = 300000;
  long window_rounds = 10;
  double dp_stop = 1e-3;
  double tau_total = 1.0;
  std::size_t grid_resolution = 0;  // 0 picks the per-dimension default
  std::vector<double> w_values;     // extra frequencies for region studies

  bool operator==(const ScenarioOptions&) const = default;
};

struct Scenario {
  int version = 1;
  SystemConfig sys;  // validated, compensators tuned at sys.w
  // Source as written; kept so serialization reproduces sys.v_tx bit for bit.
  double v_magnitude = 0.0;
  double v_phase = 0.0;
  ScenarioOptions options;
  std::optional<CoilGeometry> transmitter_geometry;
  std::vector<std::optional<CoilGeometry>> receiver_geometry;
  std::vector<std::string> warnings;
};

/// Grammar documented in docs/scenario_format.md. Syntax problems throw
/// ParseError (file:line:column); invariant violations throw ValidationError
/// with a field path such as "receiver.2.x_hi".
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& where = "<text>");

/// Electrical form with explicit h, 17 significant digits; parsing the
/// result reproduces the same SystemConfig and options.
std::string serialize_scenario(const Scenario& sc);

}  // namespace mrcwpt
