// Benchmark: serial vs OpenMP grid-deviation scans over one built word.

#include <chrono>
#include <cstdio>
#include <string>

#include "shearforge/gridscan.hpp"
#include "shearforge/verify.hpp"

#ifdef SHEARFORGE_HAVE_OPENMP
#include <omp.h>
#endif

using namespace shearforge;
using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
  int res = argc > 1 ? std::stoi(argv[1]) : 17;
  int reps = argc > 2 ? std::stoi(argv[2]) : 3;

  ProblemSpec spec;
  spec.n = 2;
  spec.config.precision_bits = 128;
  spec.config.seed = 7;
  JetMap p(2, 3, Vec(2, Scalar()), Vec(2, Scalar()));
  p.comp(0) = TruncPoly<Scalar>::coordinate(2, 3, 0);
  p.comp(1) = TruncPoly<Scalar>::coordinate(2, 3, 1);
  p.comp(1).set({2, 0}, Scalar::floating(0.5, 0.25, 128));
  p.comp(0).set({0, 3}, Scalar::floating(-0.25, 0.125, 128));
  spec.targets.push_back({p});
  spec.fix = {{Vec{Scalar(1), Scalar()}, 3}};
  ApproxSpec ap;
  ap.box = {PlaneBox{Scalar(3), Scalar(4), Scalar(-1), Scalar(1)},
            PlaneBox{Scalar(3), Scalar(4), Scalar(-1), Scalar(1)}};
  ap.eps = Scalar::rational(1, 100);
  spec.approx = ap;

  Word w = interpolate_jet_at_point(spec);
  std::vector<Vec> grid = box_grid(ap.box, res);
  std::printf("word: %zu factors; grid: %zu points (res %d per real dim)\n",
              w.factors.size(), grid.size(), res);
#ifdef SHEARFORGE_HAVE_OPENMP
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: not compiled in\n");
#endif

  auto time_it = [&](const char* name, auto&& fn) {
    Scalar result;
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
      auto t0 = Clock::now();
      result = fn();
      double dt = std::chrono::duration<double>(Clock::now() - t0).count();
      if (dt < best) best = dt;
    }
    std::printf("%-10s %8.3f s   max|W-id|^2 = %.6e\n", name, best,
                result.magnitude());
    return result;
  };

  Scalar s = time_it("serial", [&] { return grid_deviation2_serial(w, grid); });
  Scalar par = time_it("parallel", [&] { return grid_deviation2_parallel(w, grid); });
  std::printf("kernels agree: %s\n", s == par ? "yes" : "NO");
  return s == par ? 0 : 1;
}
