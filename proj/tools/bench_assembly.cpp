#include <chrono>
#include <iostream>

#include "hoist/assembly.hpp"

using namespace hoist;
using clk = std::chrono::steady_clock;

// Benchmarks the OpenMP assembly kernels against the serial reference on a
// refined space-time Burgers mesh.
int main(int argc, char** argv) {
  int nx = argc > 1 ? std::atoi(argv[1]) : 48;
  int p = argc > 2 ? std::atoi(argv[2]) : 2;
  int reps = argc > 3 ? std::atoi(argv[3]) : 5;
  auto mesh = rect_tri_mesh(-0.2, 1, 0, 1.2, nx, nx, 2);
  auto model = burgers_spacetime_model("acc");
  DgSpace space(2, p, 1, mesh.n_elems());
  Vec u = Vec::Constant(space.ndof(), 2.0);
  for (int i = 0; i < u.size(); i += 3) u[i] += 0.3;

  std::cout << "mesh: " << mesh.n_elems() << " elements, p = " << p << "\n";
  Vec r_par, r_ser;
  auto t0 = clk::now();
  for (int i = 0; i < reps; ++i)
    assemble(*model, mesh, space, u, p + 1, FluxKind::central, &r_par, nullptr, nullptr);
  auto t1 = clk::now();
  for (int i = 0; i < reps; ++i)
    r_ser = assemble_residual_serial(*model, mesh, space, u, p + 1, FluxKind::central);
  auto t2 = clk::now();

  double par_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
  double ser_ms = std::chrono::duration<double, std::milli>(t2 - t1).count() / reps;
  double diff = (r_par - r_ser).lpNorm<Eigen::Infinity>() /
                std::max(1.0, r_ser.lpNorm<Eigen::Infinity>());
  std::cout << "parallel: " << par_ms << " ms/assembly\n";
  std::cout << "serial reference: " << ser_ms << " ms/assembly\n";
  std::cout << "speedup: " << ser_ms / par_ms << "x,  max rel diff: " << diff << "\n";
  return diff < 1e-12 ? 0 : 1;
}
