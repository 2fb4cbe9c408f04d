#pragma once

#include "pbftq/error.hpp"
#include "pbftq/metrics.hpp"
#include "pbftq/model.hpp"
#include "pbftq/oracle.hpp"
#include "pbftq/report.hpp"
#include "pbftq/rng.hpp"
#include "pbftq/simulator.hpp"
#include "pbftq/solver.hpp"
#include "pbftq/svg.hpp"
#include "pbftq/sweep.hpp"
