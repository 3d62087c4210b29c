#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "xgem/nd/tensor.hpp"

namespace xgem::exemplar {

/// One recorded iterate of a traversal (latent or input space).
struct TrajectoryStep {
  std::size_t iter = 0;
  nd::Tensor z;      // latent point [k]; empty ([0]) for input-space paths
  nd::Tensor x;      // data-space point [d]
  nd::Tensor proba;  // classifier output at x [C]
  double objective = 0.0;
  double distance_from_origin = 0.0;  // ||x - x at step 0||
};

/// CSV with header `iter,z_0..,x_0..,objective,proba_0..,distance_from_origin`.
/// z columns are omitted when the steps carry no latent point. Numbers use the
/// shortest round-trip representation, so equal runs give equal bytes.
std::string trajectory_csv(std::span<const TrajectoryStep> steps);

}  // namespace xgem::exemplar
