#pragma once

#include "rpi/diagnostics.hpp"
#include "rpi/dyadic.hpp"
#include "rpi/errors.hpp"
#include "rpi/eval.hpp"
#include "rpi/game.hpp"
#include "rpi/generator.hpp"
#include "rpi/inner_max.hpp"
#include "rpi/io.hpp"
#include "rpi/linalg.hpp"
#include "rpi/model.hpp"
#include "rpi/policy_iteration.hpp"
#include "rpi/scalar.hpp"
