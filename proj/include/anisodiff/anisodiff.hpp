#pragma once

#include "anisodiff/asymptotics.hpp"
#include "anisodiff/config.hpp"
#include "anisodiff/experiment.hpp"
#include "anisodiff/grid.hpp"
#include "anisodiff/kernel.hpp"
#include "anisodiff/measure.hpp"
#include "anisodiff/operators.hpp"
#include "anisodiff/quadrature.hpp"
#include "anisodiff/solver.hpp"
#include "anisodiff/symbols.hpp"
