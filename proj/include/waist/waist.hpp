// Umbrella header: pulls in the whole library.
#pragma once

#include "waist/convex_set.hpp"
#include "waist/diagnostics.hpp"
#include "waist/error.hpp"
#include "waist/io.hpp"
#include "waist/objective.hpp"
#include "waist/oracle.hpp"
#include "waist/problem.hpp"
#include "waist/solver.hpp"
#include "waist/vec.hpp"
