#include "assembly_detail.hpp"

namespace hoist {

using namespace assembly_detail;

// Single-threaded element-major reference: every element integrates its own
// volume term and gathers its faces in local-face order. Used to validate
// the parallel face/element reduction and as the benchmark baseline.
Vec assemble_residual_serial(const ClawModel& model, const SimplexMesh& mesh,
                             const DgSpace& space, const Vec& u, int p_test,
                             FluxKind flux) {
  int d = mesh.dim(), m = space.m;
  const Tables& t = get_tables(d, mesh.degree(), space.p, p_test);
  int np_te = simplex_basis_size(d, p_test);
  Vec r = Vec::Zero(mesh.n_elems() * np_te * m);

  // face fluxes are computed once per face (owner-side geometry) so the
  // result stays conservative; the traversal and accumulation are serial
  std::vector<FaceBlock> fblocks(mesh.n_faces());
  for (int f = 0; f < mesh.n_faces(); ++f)
    assemble_face(model, mesh, space, t, u, np_te, mesh.faces()[f], false, fblocks[f],
                  flux);

  for (int e = 0; e < mesh.n_elems(); ++e) {
    ElemBlock eb;
    assemble_volume(model, mesh, space, t, u, np_te, e, false, eb);
    r.segment(e * np_te * m, np_te * m) = eb.r;
    for (int lf = 0; lf <= d; ++lf) {
      int fid = mesh.elem_face_id(e, lf);
      const auto& fi = mesh.faces()[fid];
      if (fi.elem_l == e)
        r.segment(e * np_te * m, np_te * m) += fblocks[fid].r_l;
      else
        r.segment(e * np_te * m, np_te * m) += fblocks[fid].r_r;
    }
  }
  return r;
}

}  // namespace hoist
