#pragma once

// Umbrella header.

#include "cfrechet/errors.hpp"
#include "cfrechet/experiments.hpp"
#include "cfrechet/instances.hpp"
#include "cfrechet/io.hpp"
#include "cfrechet/linalg.hpp"
#include "cfrechet/metrics.hpp"
#include "cfrechet/ot.hpp"
#include "cfrechet/random.hpp"
#include "cfrechet/report.hpp"
#include "cfrechet/stats.hpp"
#include "cfrechet/version.hpp"
