#pragma once

// Everything except the command-line front end.

#include "lpball/analytic.hpp"
#include "lpball/config.hpp"
#include "lpball/errors.hpp"
#include "lpball/experiments.hpp"
#include "lpball/exponent.hpp"
#include "lpball/parallel.hpp"
#include "lpball/quadrature.hpp"
#include "lpball/ratefn.hpp"
#include "lpball/report.hpp"
#include "lpball/rng.hpp"
#include "lpball/sampling.hpp"
#include "lpball/statistics.hpp"
