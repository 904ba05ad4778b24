#pragma once

#include <memory>

#include "gpid/sim/models/hoop_model.hpp"
#include "gpid/sim/models/ipc_model.hpp"
#include "gpid/sim/models/pendulum_model.hpp"
#include "gpid/sim/models/quadrotor_model.hpp"
#include "gpid/sim/models/sphere_model.hpp"

namespace gpid::sim {

struct SystemInfo {
  const char* id;
  const char* summary;
};

inline const std::vector<SystemInfo>& systems() {
  static const std::vector<SystemInfo> list{
      {"quadrotor", "attitude tracking on SO(3), motor allocation with saturation"},
      {"ipc", "inverted pendulum on a cart on an incline"},
      {"hoop", "hoop rolling on an incline with an internal actuator"},
      {"sphere", "sphere rolling on an incline with an internal cart"},
      {"pendulum", "spherical pendulum on SO(3) with Omega_3 = 0"},
  };
  return list;
}

/// Builds the model and rejects keys that no parser consumed.
inline std::unique_ptr<Model> make_model(Scenario& sc) {
  std::unique_ptr<Model> m;
  if (sc.system == "quadrotor") {
    m = std::make_unique<QuadrotorModel>(sc);
  } else if (sc.system == "ipc") {
    m = std::make_unique<IpcModel>(sc);
  } else if (sc.system == "hoop") {
    m = std::make_unique<HoopModel>(sc);
  } else if (sc.system == "sphere") {
    m = std::make_unique<SphereModel>(sc);
  } else if (sc.system == "pendulum") {
    m = std::make_unique<PendulumModel>(sc);
  } else {
    throw ScenarioError("unknown system '" + sc.system + "'");
  }
  sc.check_unknown_keys();
  for (const auto& w : m->warnings()) sc.warnings.push_back(w);
  return m;
}

}  // namespace gpid::sim
