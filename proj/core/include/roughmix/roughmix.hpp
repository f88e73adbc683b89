#pragma once

#include "roughmix/error.hpp"
#include "roughmix/estimate.hpp"
#include "roughmix/gmfbm.hpp"
#include "roughmix/io.hpp"
#include "roughmix/lift.hpp"
#include "roughmix/rde.hpp"
#include "roughmix/rng.hpp"
#include "roughmix/signature.hpp"
#include "roughmix/stats.hpp"
#include "roughmix/tensor.hpp"
#include "roughmix/version.hpp"
