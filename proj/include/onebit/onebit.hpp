#pragma once

#include "onebit/channel.hpp"
#include "onebit/common.hpp"
#include "onebit/experiment.hpp"
#include "onebit/frontend.hpp"
#include "onebit/gamp.hpp"
#include "onebit/lifting.hpp"
#include "onebit/linalg.hpp"
#include "onebit/metrics.hpp"
#include "onebit/pipeline.hpp"
#include "onebit/recovery.hpp"
