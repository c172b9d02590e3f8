#pragma once

#include "esbgk/boundary.hpp"
#include "esbgk/constants.hpp"
#include "esbgk/errors.hpp"
#include "esbgk/field.hpp"
#include "esbgk/gaussian.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/iteration.hpp"
#include "esbgk/math3.hpp"
#include "esbgk/moments.hpp"
#include "esbgk/norms.hpp"
#include "esbgk/runio.hpp"
#include "esbgk/sweep.hpp"
