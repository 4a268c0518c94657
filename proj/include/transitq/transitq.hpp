#pragma once

// Umbrella header.

#include "transitq/config_io.hpp"
#include "transitq/distribution.hpp"
#include "transitq/error.hpp"
#include "transitq/format.hpp"
#include "transitq/headway.hpp"
#include "transitq/model.hpp"
#include "transitq/random.hpp"
#include "transitq/report_io.hpp"
#include "transitq/roots.hpp"
#include "transitq/simulator.hpp"
#include "transitq/solver.hpp"
#include "transitq/special.hpp"
