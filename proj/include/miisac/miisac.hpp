#pragma once

#include "miisac/config.hpp"
#include "miisac/errors.hpp"
#include "miisac/estimation.hpp"
#include "miisac/fisher.hpp"
#include "miisac/montecarlo.hpp"
#include "miisac/nelder_mead.hpp"
#include "miisac/physics.hpp"
#include "miisac/rng.hpp"
#include "miisac/sweep.hpp"
#include "miisac/table.hpp"
