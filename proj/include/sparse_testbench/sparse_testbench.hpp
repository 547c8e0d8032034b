#pragma once

#include "sparse_testbench/error.hpp"
#include "sparse_testbench/numeric.hpp"
#include "sparse_testbench/random.hpp"
#include "sparse_testbench/design.hpp"
#include "sparse_testbench/signal.hpp"
#include "sparse_testbench/statistics.hpp"
#include "sparse_testbench/decision.hpp"
#include "sparse_testbench/theory.hpp"
#include "sparse_testbench/risk.hpp"
#include "sparse_testbench/oracle.hpp"
#include "sparse_testbench/svg.hpp"
#include "sparse_testbench/experiment.hpp"
