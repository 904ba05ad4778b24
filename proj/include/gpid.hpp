#pragma once

#include "gpid/errors.hpp"
#include "gpid/lie.hpp"
#include "gpid/geometry.hpp"
#include "gpid/pid.hpp"
#include "gpid/gain_bounds.hpp"
#include "gpid/lyapunov.hpp"
#include "gpid/systems/quadrotor.hpp"
#include "gpid/systems/ipc.hpp"
#include "gpid/systems/hoop.hpp"
#include "gpid/systems/sphere.hpp"
#include "gpid/systems/pendulum.hpp"
#include "gpid/sim/runner.hpp"
