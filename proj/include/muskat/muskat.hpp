#pragma once

// Umbrella header for the two-phase bubble contour solver library.

#include "muskat/config.hpp"
#include "muskat/diagnostics.hpp"
#include "muskat/errors.hpp"
#include "muskat/evolution.hpp"
#include "muskat/geometry.hpp"
#include "muskat/integrator.hpp"
#include "muskat/linear_theory.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/run_io.hpp"
#include "muskat/snapshot.hpp"
#include "muskat/spectral.hpp"
#include "muskat/verify.hpp"
#include "muskat/version.hpp"
#include "muskat/vorticity.hpp"
