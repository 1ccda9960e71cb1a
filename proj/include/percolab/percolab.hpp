#pragma once

#include "percolab/bounds.hpp"
#include "percolab/coupling.hpp"
#include "percolab/environment.hpp"
#include "percolab/estimator.hpp"
#include "percolab/exploration.hpp"
#include "percolab/flatset.hpp"
#include "percolab/graph_json.hpp"
#include "percolab/graphs.hpp"
#include "percolab/lattice.hpp"
#include "percolab/parallel.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"
