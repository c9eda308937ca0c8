#pragma once

// Umbrella include for the whole library.

#include "qfeyn/operator_core.hpp"
#include "qfeyn/propagator_oracle.hpp"
#include "qfeyn/chernoff_families.hpp"
#include "qfeyn/quasi_feynman.hpp"
#include "qfeyn/baselines.hpp"
#include "qfeyn/experiment.hpp"
