#pragma once

#include "afcsim/absorption.hpp"
#include "afcsim/comb.hpp"
#include "afcsim/constants.hpp"
#include "afcsim/decay.hpp"
#include "afcsim/ensemble.hpp"
#include "afcsim/error.hpp"
#include "afcsim/evolve.hpp"
#include "afcsim/experiments/calibration.hpp"
#include "afcsim/experiments/config.hpp"
#include "afcsim/experiments/config_io.hpp"
#include "afcsim/experiments/export.hpp"
#include "afcsim/experiments/scenarios.hpp"
#include "afcsim/fit/least_squares.hpp"
#include "afcsim/fit/models.hpp"
#include "afcsim/grid.hpp"
#include "afcsim/io/csv.hpp"
#include "afcsim/io/files.hpp"
#include "afcsim/io/format.hpp"
#include "afcsim/io/hash.hpp"
#include "afcsim/io/svg.hpp"
#include "afcsim/material.hpp"
#include "afcsim/pump_rate.hpp"
#include "afcsim/pump_sequence.hpp"
#include "afcsim/readout.hpp"
#include "afcsim/relaxation.hpp"
#include "afcsim/units.hpp"
