#ifndef PACING_PACING_HPP
#define PACING_PACING_HPP

#include "pacing/auction.hpp"
#include "pacing/config.hpp"
#include "pacing/controllers.hpp"
#include "pacing/harness.hpp"
#include "pacing/metrics.hpp"
#include "pacing/plant_sim.hpp"
#include "pacing/report.hpp"
#include "pacing/rng.hpp"

#endif  // PACING_PACING_HPP
