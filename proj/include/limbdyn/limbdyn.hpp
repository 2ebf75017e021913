#pragma once

#include "limbdyn/ankle_model.hpp"
#include "limbdyn/anthropometry.hpp"
#include "limbdyn/axis_optimizer.hpp"
#include "limbdyn/commands.hpp"
#include "limbdyn/config.hpp"
#include "limbdyn/control.hpp"
#include "limbdyn/csv.hpp"
#include "limbdyn/differential_evolution.hpp"
#include "limbdyn/dynamics.hpp"
#include "limbdyn/errors.hpp"
#include "limbdyn/kinematics.hpp"
#include "limbdyn/reference_data.hpp"
#include "limbdyn/rk4.hpp"
#include "limbdyn/units.hpp"
#include "limbdyn/version.hpp"
