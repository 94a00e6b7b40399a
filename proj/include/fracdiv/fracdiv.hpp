#pragma once

#include "fracdiv/constructions.hpp"
#include "fracdiv/divisibility.hpp"
#include "fracdiv/errors.hpp"
#include "fracdiv/experiments.hpp"
#include "fracdiv/harmonics.hpp"
#include "fracdiv/io.hpp"
#include "fracdiv/random.hpp"
#include "fracdiv/rotations.hpp"
#include "fracdiv/version.hpp"
