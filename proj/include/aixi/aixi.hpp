#pragma once

#include "aixi/aixitl.hpp"
#include "aixi/core.hpp"
#include "aixi/domains.hpp"
#include "aixi/errors.hpp"
#include "aixi/eval.hpp"
#include "aixi/model.hpp"
#include "aixi/planner.hpp"
#include "aixi/rational.hpp"
#include "aixi/scenario.hpp"
#include "aixi/vm.hpp"
