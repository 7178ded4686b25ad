#pragma once

// Umbrella header.

#include "mbe/baselines.hpp"
#include "mbe/config.hpp"
#include "mbe/ensemble.hpp"
#include "mbe/envs.hpp"
#include "mbe/errors.hpp"
#include "mbe/io.hpp"
#include "mbe/linear.hpp"
#include "mbe/mab.hpp"
#include "mbe/policy.hpp"
#include "mbe/rng.hpp"
#include "mbe/score.hpp"
#include "mbe/simulator.hpp"
#include "mbe/spec_string.hpp"
#include "mbe/structured.hpp"
#include "mbe/theorycheck.hpp"
#include "mbe/version.hpp"
#include "mbe/weights.hpp"
