#pragma once

// Single include pulling in the whole library.

#include "fidopt/assignment.hpp"
#include "fidopt/blackbox.hpp"
#include "fidopt/controller.hpp"
#include "fidopt/core.hpp"
#include "fidopt/ext_real.hpp"
#include "fidopt/harness.hpp"
#include "fidopt/problems.hpp"
#include "fidopt/rng.hpp"
#include "fidopt/sampling.hpp"
#include "fidopt/serialize.hpp"
#include "fidopt/solver.hpp"
#include "fidopt/subprocess.hpp"
#include "fidopt/synthetic.hpp"
