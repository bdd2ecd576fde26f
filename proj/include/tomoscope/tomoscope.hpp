#pragma once

// Umbrella header. Pull in individual headers instead when compile time
// matters; everything lives in namespace tomoscope.

#include "tomoscope/analysis.hpp"
#include "tomoscope/config.hpp"
#include "tomoscope/fock.hpp"
#include "tomoscope/indicators.hpp"
#include "tomoscope/linalg.hpp"
#include "tomoscope/models.hpp"
#include "tomoscope/parallel.hpp"
#include "tomoscope/rng.hpp"
#include "tomoscope/runner.hpp"
#include "tomoscope/tomography.hpp"
#include "tomoscope/version.hpp"
