#pragma once

#include "warpspec/error.hpp"
#include "warpspec/numerics.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/conditions.hpp"
#include "warpspec/thresholds.hpp"
#include "warpspec/separation.hpp"
#include "warpspec/solver.hpp"
#include "warpspec/counterexample.hpp"
