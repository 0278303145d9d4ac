#pragma once

#include "commands.hpp"
#include "decay_state.hpp"
#include "discretizer.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "hawkes_model.hpp"
#include "io.hpp"
#include "learner.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "random.hpp"
#include "scenarios.hpp"
#include "simulator.hpp"
#include "types.hpp"
