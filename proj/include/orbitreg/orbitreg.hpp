#pragma once

// Umbrella header for the orbitreg library.

#include "orbitreg/bigfloat.hpp"
#include "orbitreg/errors.hpp"
#include "orbitreg/group_closure.hpp"
#include "orbitreg/intlat.hpp"
#include "orbitreg/io.hpp"
#include "orbitreg/lie_log.hpp"
#include "orbitreg/matrix.hpp"
#include "orbitreg/normal_form.hpp"
#include "orbitreg/orbit_engine.hpp"
#include "orbitreg/relations.hpp"
#include "orbitreg/sampler.hpp"
#include "orbitreg/symbolic.hpp"
