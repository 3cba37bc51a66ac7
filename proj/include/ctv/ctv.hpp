#pragma once

// Umbrella header for the deconvolution toolkit.

#include "ctv/errors.hpp"
#include "ctv/experiment.hpp"
#include "ctv/grid.hpp"
#include "ctv/kernel.hpp"
#include "ctv/metrics.hpp"
#include "ctv/noise.hpp"
#include "ctv/pgm.hpp"
#include "ctv/shape.hpp"
#include "ctv/solver.hpp"
#include "ctv/trace_csv.hpp"
#include "ctv/variation.hpp"
