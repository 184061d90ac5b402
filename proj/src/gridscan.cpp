#include "shearforge/gridscan.hpp"

#include "shearforge/interp_function.hpp"

#ifdef SHEARFORGE_HAVE_OPENMP
#include <omp.h>
#endif

namespace shearforge {

namespace {

Scalar point_deviation2(const Word& w, const Vec& z) {
  Vec img = word_eval(w, z);
  Scalar d2;
  for (size_t i = 0; i < z.size(); ++i) d2 += (img[i] - z[i]).abs2();
  return d2;
}

}  // namespace

Scalar grid_deviation2_serial(const Word& w, const std::vector<Vec>& grid) {
  Scalar best;
  for (const auto& z : grid) best = real_max(best, point_deviation2(w, z));
  return best;
}

Scalar grid_deviation2_parallel(const Word& w, const std::vector<Vec>& grid) {
#ifdef SHEARFORGE_HAVE_OPENMP
  const long n = static_cast<long>(grid.size());
  int threads = 1;
#pragma omp parallel
  {
#pragma omp single
    threads = omp_get_num_threads();
  }
  std::vector<Scalar> local(threads);
#pragma omp parallel
  {
    const int tid = omp_get_thread_num();
    Scalar mine;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) mine = real_max(mine, point_deviation2(w, grid[i]));
    local[tid] = std::move(mine);
  }
  Scalar best;
  for (const auto& m : local) best = real_max(best, m);
  return best;
#else
  return grid_deviation2_serial(w, grid);
#endif
}

Scalar grid_deviation2(const Word& w, const std::vector<Vec>& grid) {
  return grid_deviation2_parallel(w, grid);
}

Scalar grid_deviation2(const ParamWord& w, const std::vector<Vec>& grid,
                       const std::vector<Scalar>& param_grid) {
  std::vector<Scalar> xs = param_grid;
  if (xs.empty()) xs.push_back(Scalar());
  Scalar best;
  for (const auto& x : xs) {
    Word wx = specialize(w, x);
    best = real_max(best, grid_deviation2(wx, grid));
  }
  return best;
}

}  // namespace shearforge
