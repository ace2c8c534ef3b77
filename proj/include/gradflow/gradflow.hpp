#pragma once

#include "gradflow/bdf.hpp"
#include "gradflow/config.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/fft.hpp"
#include "gradflow/grid.hpp"
#include "gradflow/harness.hpp"
#include "gradflow/integrators.hpp"
#include "gradflow/io.hpp"
#include "gradflow/models.hpp"
#include "gradflow/multiplier.hpp"
#include "gradflow/navier_stokes.hpp"
#include "gradflow/random.hpp"
#include "gradflow/spectral.hpp"
