// Umbrella header for the entdist library

#pragma once

#include "entdist/config.hpp"
#include "entdist/convolution.hpp"
#include "entdist/dynamics.hpp"
#include "entdist/entanglement.hpp"
#include "entdist/errors.hpp"
#include "entdist/io.hpp"
#include "entdist/oracle.hpp"
#include "entdist/quadrature.hpp"
#include "entdist/scenario.hpp"
#include "entdist/spectral.hpp"
