#pragma once

#include "hoist/mesh.hpp"
#include "hoist/param.hpp"

namespace hoist {

// ideal element the physical elements are measured against
enum class IdealElement {
  reference,  // the element of the reference mesh
  regular,    // regular d-simplex scaled to unit volume
};

struct DistortionOptions {
  IdealElement ideal = IdealElement::regular;
  double smoothing = 1e-10;  // width of the smooth positive part of det
  double cap = 1e10;         // value assigned past inversion
};

// element shape-quality value: >= 1, == 1 exactly for similarity maps of the
// ideal element, capped for (nearly) inverted elements
double element_distortion(const SimplexMesh& mesh, int e, const DistortionOptions& opt);

// per-element distortion vector and (optionally) its Jacobian wrt physical
// node coordinates; element-parallel
void assemble_distortion(const SimplexMesh& mesh, const DistortionOptions& opt, Vec* Rmsh,
                         SpMat* dRmsh_dx);

}  // namespace hoist
