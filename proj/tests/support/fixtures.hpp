#pragma once

#include "xgem/experiments/parabola.hpp"

namespace xgem::testing {

/// The default parabola world, trained once per test process.
const experiments::ParabolaWorld& parabola_world();
const experiments::ParabolaFig1Config& parabola_config();

}  // namespace xgem::testing
