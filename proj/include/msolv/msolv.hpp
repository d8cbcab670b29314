#pragma once

#include "msolv/builtins.hpp"
#include "msolv/constructions.hpp"
#include "msolv/crowell.hpp"
#include "msolv/dsl.hpp"
#include "msolv/error.hpp"
#include "msolv/experiments.hpp"
#include "msolv/fingroup.hpp"
#include "msolv/foxcalc.hpp"
#include "msolv/grpring.hpp"
#include "msolv/models.hpp"
#include "msolv/report.hpp"
#include "msolv/rng.hpp"
#include "msolv/zmodlin.hpp"
