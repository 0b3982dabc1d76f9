#pragma once

#include "mkv/errors.hpp"
#include "mkv/spectral_field.hpp"
#include "mkv/philox.hpp"
#include "mkv/model.hpp"
#include "mkv/noise.hpp"
#include "mkv/observables.hpp"
#include "mkv/integrator.hpp"
#include "mkv/stationary.hpp"
#include "mkv/stability.hpp"
#include "mkv/convergence.hpp"
#include "mkv/io/formats.hpp"
#include "mkv/io/config.hpp"
