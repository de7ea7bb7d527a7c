#pragma once

#include "probit_mix/bounds.hpp"
#include "probit_mix/couplings.hpp"
#include "probit_mix/datagen.hpp"
#include "probit_mix/diagnostics.hpp"
#include "probit_mix/errors.hpp"
#include "probit_mix/io.hpp"
#include "probit_mix/linalg.hpp"
#include "probit_mix/model.hpp"
#include "probit_mix/random.hpp"
#include "probit_mix/replicates.hpp"
#include "probit_mix/samplers.hpp"
#include "probit_mix/special_functions.hpp"
