#pragma once

#include "hawkes/analysis.hpp"
#include "hawkes/calibrate.hpp"
#include "hawkes/error.hpp"
#include "hawkes/event_stream.hpp"
#include "hawkes/expfit.hpp"
#include "hawkes/json_io.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/ldp.hpp"
#include "hawkes/marks.hpp"
#include "hawkes/markov_state.hpp"
#include "hawkes/mc.hpp"
#include "hawkes/parallel.hpp"
#include "hawkes/rate.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/ruin.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/stats.hpp"
#include "hawkes/summary.hpp"
