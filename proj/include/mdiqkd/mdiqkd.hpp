#pragma once

// Umbrella header: the whole decoy-state analysis library.

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/common.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/key_rate.hpp"
#include "mdiqkd/photon_source.hpp"
#include "mdiqkd/scalar_search.hpp"
#include "mdiqkd/scenario.hpp"
#include "mdiqkd/simplex.hpp"
#include "mdiqkd/sweep.hpp"
#include "mdiqkd/verification.hpp"
