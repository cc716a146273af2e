#pragma once

// Umbrella header.

#include "care/baselines.hpp"
#include "care/calibration.hpp"
#include "care/conformal.hpp"
#include "care/errors.hpp"
#include "care/estimators.hpp"
#include "care/eval.hpp"
#include "care/io.hpp"
#include "care/pipeline.hpp"
#include "care/quantile.hpp"
#include "care/synthgen.hpp"
#include "care/types.hpp"
