#include "fixtures.hpp"

namespace xgem::testing {

const experiments::ParabolaFig1Config& parabola_config() {
  static const experiments::ParabolaFig1Config cfg = [] {
    experiments::ParabolaFig1Config c;
    c.resolve();
    return c;
  }();
  return cfg;
}

const experiments::ParabolaWorld& parabola_world() {
  static const experiments::ParabolaWorld world = experiments::build_parabola_world(parabola_config());
  return world;
}

}  // namespace xgem::testing
