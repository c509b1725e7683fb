#pragma once

// Umbrella header for the energy-expenditure estimation library.

#include "paee/csv.hpp"
#include "paee/data_io.hpp"
#include "paee/data_model.hpp"
#include "paee/dataset_io.hpp"
#include "paee/error.hpp"
#include "paee/eval.hpp"
#include "paee/experiment.hpp"
#include "paee/matrix.hpp"
#include "paee/nn.hpp"
#include "paee/nn_serialize.hpp"
#include "paee/optim.hpp"
#include "paee/preprocess.hpp"
#include "paee/rng.hpp"
#include "paee/runconfig.hpp"
#include "paee/sequencing.hpp"
#include "paee/synth.hpp"
