#pragma once

#include "kuramoto/torus.hpp"
#include "kuramoto/frequency.hpp"
#include "kuramoto/bounds.hpp"
#include "kuramoto/ode.hpp"
#include "kuramoto/dynamics.hpp"
#include "kuramoto/stability.hpp"
#include "kuramoto/experiments.hpp"
