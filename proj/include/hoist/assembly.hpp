#pragma once

#include "hoist/mesh.hpp"
#include "hoist/models.hpp"
#include "hoist/param.hpp"

namespace hoist {

// thrown (after the parallel region) when the mapping is inverted at a
// quadrature point; the line search treats it like a nonphysical state
struct inverted_element_error : std::runtime_error {
  inverted_element_error() : std::runtime_error("inverted element at quadrature point") {}
};

struct DgSpace {
  int p = 1;   // polynomial degree
  int m = 1;   // solution components
  int np = 0;  // basis size per element
  int n_elems = 0;

  DgSpace() = default;
  DgSpace(int dim, int degree, int comps, int elems)
      : p(degree), m(comps), np(simplex_basis_size(dim, degree)), n_elems(elems) {}
  int ndof() const { return n_elems * np * m; }
  int dof(int e, int i, int c) const { return (e * np + i) * m + c; }
};

enum class FluxKind { upwind, central };

// Assembles the DG residual tested against degree p_test (p_test = p gives r,
// p_test = p+1 with the central flux gives the enriched residual R) and,
// when requested, the sparse Jacobians with respect to u and the physical
// node coordinates. OpenMP-parallel over faces and elements.
void assemble(const ClawModel& model, const SimplexMesh& mesh, const DgSpace& space,
              const Vec& u, int p_test, FluxKind flux, Vec* r, SpMat* dr_du,
              SpMat* dr_dx);

// single-threaded reference implementation (element-major traversal), kept
// for testing and benchmarking against the parallel kernels
Vec assemble_residual_serial(const ClawModel& model, const SimplexMesh& mesh,
                             const DgSpace& space, const Vec& u, int p_test,
                             FluxKind flux);

// element-local L2 projection between polynomial degrees (on the reference
// element, exact whenever to_p >= from_p)
Vec project_solution(const SimplexMesh& mesh, const Vec& u, int m, int from_p, int to_p);

// evaluate the DG field on element e at master points (npts x m)
Mat eval_solution(const SimplexMesh& mesh, const DgSpace& space, const Vec& u, int e,
                  const Mat& xi);

}  // namespace hoist
