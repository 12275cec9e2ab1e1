#pragma once

#include "cvmdi/channel.hpp"
#include "cvmdi/errors.hpp"
#include "cvmdi/estimation.hpp"
#include "cvmdi/finite_size.hpp"
#include "cvmdi/gaussian.hpp"
#include "cvmdi/keyrate.hpp"
#include "cvmdi/optimizer.hpp"
#include "cvmdi/simulator.hpp"
