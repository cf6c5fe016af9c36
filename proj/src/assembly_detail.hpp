#pragma once

// internal kernels shared by the OpenMP assembly and the serial reference
#include "hoist/assembly.hpp"

namespace hoist {
namespace assembly_detail {

struct Tables {
  QuadRule vol;
  Mat theta, psi, geo;
  std::vector<Mat> dpsi, dgeo;
  QuadRule face;
  std::vector<Mat> theta_f, psi_f, theta_f_rev, psi_f_rev;
  Mat g1d, dg1d;
  int nq = 0, nfq = 0;
};

const Tables& get_tables(int d, int q, int p_trial, int p_test);

using Trip = Eigen::Triplet<double>;

std::vector<int> face_chain(const SimplexMesh& mesh, int e, int lf);

struct FaceBlock {
  Vec r_l, r_r;
  std::vector<Trip> du, dx;
};

struct ElemBlock {
  Vec r;
  std::vector<Trip> du, dx;
};

void assemble_face(const ClawModel& model, const SimplexMesh& mesh, const DgSpace& space,
                   const Tables& t, const Vec& u, int np_te, const FaceInfo& fi,
                   bool want_jac, FaceBlock& fb, FluxKind kind);

void assemble_volume(const ClawModel& model, const SimplexMesh& mesh, const DgSpace& space,
                     const Tables& t, const Vec& u, int np_te, int e, bool want_jac,
                     ElemBlock& eb);

}  // namespace assembly_detail
}  // namespace hoist
