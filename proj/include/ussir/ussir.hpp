// Everything at once.
#pragma once

#include "commands.hpp"
#include "criteria.hpp"
#include "error.hpp"
#include "expr.hpp"
#include "integrator.hpp"
#include "levy.hpp"
#include "models.hpp"
#include "montecarlo.hpp"
#include "rng.hpp"
#include "scenario.hpp"
