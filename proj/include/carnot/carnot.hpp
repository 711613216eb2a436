#pragma once

#include "carnot/dexp.hpp"
#include "carnot/equations.hpp"
#include "carnot/errors.hpp"
#include "carnot/finite_diff.hpp"
#include "carnot/flag.hpp"
#include "carnot/integrate.hpp"
#include "carnot/io.hpp"
#include "carnot/lie_algebra.hpp"
#include "carnot/scenarios.hpp"
#include "carnot/two_step.hpp"
