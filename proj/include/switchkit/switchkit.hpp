#pragma once

// Umbrella header for the switch-process toolkit.

#include "switchkit/characteristics.hpp"
#include "switchkit/csv.hpp"
#include "switchkit/errors.hpp"
#include "switchkit/estimators.hpp"
#include "switchkit/grid.hpp"
#include "switchkit/laplace.hpp"
#include "switchkit/law_json.hpp"
#include "switchkit/process.hpp"
#include "switchkit/recovery.hpp"
#include "switchkit/rng.hpp"
#include "switchkit/switching_law.hpp"
#include "switchkit/transform.hpp"
