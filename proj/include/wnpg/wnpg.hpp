// Umbrella header.

#pragma once

#include "wnpg/checks.hpp"
#include "wnpg/config.hpp"
#include "wnpg/core.hpp"
#include "wnpg/env.hpp"
#include "wnpg/estimator.hpp"
#include "wnpg/noise.hpp"
#include "wnpg/numerics.hpp"
#include "wnpg/optimize.hpp"
#include "wnpg/parallel.hpp"
#include "wnpg/policy.hpp"
#include "wnpg/report.hpp"
#include "wnpg/seed.hpp"
#include "wnpg/theory.hpp"
#include "wnpg/train.hpp"
