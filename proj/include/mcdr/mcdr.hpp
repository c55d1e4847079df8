#pragma once

#include "mcdr/constraint_system.hpp"
#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/instances.hpp"
#include "mcdr/io.hpp"
#include "mcdr/linalg.hpp"
#include "mcdr/objectives.hpp"
#include "mcdr/report.hpp"
#include "mcdr/rounding/delta_bound.hpp"
#include "mcdr/rounding/extreme_round.hpp"
#include "mcdr/rounding/iterative_sdp.hpp"
#include "mcdr/rounding/mcdr_round.hpp"
#include "mcdr/solvers/barrier_sdp.hpp"
#include "mcdr/solvers/bisect.hpp"
#include "mcdr/solvers/fw.hpp"
#include "mcdr/solvers/mw.hpp"
#include "mcdr/solvers/pca_oracle.hpp"
#include "mcdr/solvers/relaxation.hpp"
