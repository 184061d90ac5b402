#pragma once

#include <vector>

#include "shearforge/primitive.hpp"

namespace shearforge {

// max over the grid of |w(z) - z|^2, as a real scalar. The serial kernel is
// the reference; the parallel kernel splits the grid across OpenMP threads
// with a per-thread running maximum and must produce the identical value
// (every point's evaluation is deterministic, and max is order-free).
Scalar grid_deviation2_serial(const Word& w, const std::vector<Vec>& grid);
Scalar grid_deviation2_parallel(const Word& w, const std::vector<Vec>& grid);

// dispatches to the parallel kernel when compiled with OpenMP
Scalar grid_deviation2(const Word& w, const std::vector<Vec>& grid);

// parameter-family variant: max over the grid and the parameter values
Scalar grid_deviation2(const ParamWord& w, const std::vector<Vec>& grid,
                       const std::vector<Scalar>& param_grid);

}  // namespace shearforge
