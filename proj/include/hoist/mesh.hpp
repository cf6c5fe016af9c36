#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hoist/basis.hpp"

namespace hoist {

// One mesh face. Interior faces store both incident (element, local face)
// pairs; boundary faces store the owner side and a tag.
struct FaceInfo {
  int elem_l = -1, face_l = -1;
  int elem_r = -1, face_r = -1;
  int btag = -1;
  bool boundary() const { return elem_r < 0; }
};

struct ElementMeasures {
  double v0 = 0;     // reference volume
  double v = 0;      // physical volume (signed)
  double l_min = 0;  // shortest edge (endpoint distance, physical)
  double l_max = 0;
  double g_inf = 0;  // min of det(grad G_h) over the sample set
  double g_sup = 0;
};

// Degree-q simplicial mesh of the reference domain together with the
// physical coordinates of its nodes. Element node lists use the layout of
// simplex_nodes: vertices, then edge nodes per edge, then interior nodes.
class SimplexMesh {
 public:
  SimplexMesh() = default;
  SimplexMesh(int dim, int q, Mat ref_nodes, Mat phys_nodes,
              std::vector<std::vector<int>> elems,
              std::vector<std::array<int, 3>> boundary_faces, int n_btags);

  int dim() const { return dim_; }
  int degree() const { return q_; }
  int n_nodes() const { return int(ref_nodes_.rows()); }
  int n_elems() const { return int(elems_.size()); }
  int n_faces() const { return int(faces_.size()); }
  int n_btags() const { return n_btags_; }
  int nodes_per_elem() const { return simplex_basis_size(dim_, q_); }
  int n_local_faces() const { return dim_ + 1; }

  const Mat& ref_nodes() const { return ref_nodes_; }
  const Mat& phys_nodes() const { return phys_nodes_; }
  Mat& phys_nodes() { return phys_nodes_; }
  void set_ref_node(int i, const Vec& x) { ref_nodes_.row(i) = x.transpose(); }
  const std::vector<int>& elem_nodes(int e) const { return elems_[e]; }
  const std::vector<FaceInfo>& faces() const { return faces_; }
  int elem_face_id(int e, int lf) const { return elem_face_[e][lf]; }
  const NodalBasis& geom_basis() const { return geom_basis_; }

  const std::vector<uint8_t>& fixed() const { return fixed_; }
  void set_fixed(int node, bool f) { fixed_[node] = f ? 1 : 0; }

  // mapping evaluation on element e at reference-simplex points (npts x d)
  Mat map_ref(int e, const Mat& xi) const;   // master -> reference domain
  Mat map_phys(int e, const Mat& xi) const;  // master -> physical domain

  // deformation gradient G = d(phys)/d(ref) and its determinant at xi
  void mapping_jacobian(int e, const Vec& xi, Mat& G, double& g) const;

  ElementMeasures element_measures(int e) const;

  // edges of element e as pairs of global vertex node ids
  std::vector<std::array<int, 2>> elem_edges(int e) const;

  // inverse of the master->physical (or master->reference) map by Newton;
  // returns false if it leaves the element by more than `slack`
  bool invert_map(int e, const Vec& x, bool physical, Vec& xi,
                  double slack = 1e-8) const;
  // find the element containing physical point x (bounding-box prefilter)
  bool locate(const Vec& x, int& e, Vec& xi) const;

  // reset high-order nodes of element e to the affine interpolant of its
  // vertices (no-op for q = 1); operates on the chosen coordinate set
  void straighten_element(int e, bool physical);

  double bbox_diameter() const;

  void validate() const;  // throws std::runtime_error on broken invariants

 private:
  friend struct CollapseOps;
  void build_adjacency(const std::vector<std::array<int, 3>>& boundary_faces);

  int dim_ = 2, q_ = 1, n_btags_ = 0;
  Mat ref_nodes_, phys_nodes_;
  std::vector<std::vector<int>> elems_;
  std::vector<FaceInfo> faces_;
  std::vector<std::array<int, 3>> elem_face_;
  std::vector<uint8_t> fixed_;
  NodalBasis geom_basis_;
  QuadRule measure_rule_;
  Mat sample_pts_;  // quadrature points plus basis nodes, for g_inf / g_sup
};

// ----- edge collapse --------------------------------------------------------

enum class CollapseError {
  ok,
  not_an_edge,
  duplicate_element,   // link condition violated / identical element created
  boundary_pinch,      // interior edge between two boundary vertices
  empty_mesh,
  inverted_reference,  // straightened reference element would fold over
};

struct CollapseResult {
  SimplexMesh mesh;
  std::vector<int> node_map;      // old node id -> new id (-1 if dropped)
  std::vector<int> elem_map;      // old element id -> new id (-1 if deleted)
  std::vector<int> deleted_elems;
};

// Collapse edge (a, b), a and b vertex nodes of a shared edge, positioning
// the degenerate edge at `keep`. High-order nodes of merged faces unify to
// the kept side; reference elements whose vertex set changed are reset to
// straight-sided.
std::optional<CollapseResult> collapse_edge(const SimplexMesh& mesh, int a, int b,
                                            int keep, CollapseError* err = nullptr);

// admissibility pre-check used by collapse_edge and the removal driver
CollapseError check_collapse(const SimplexMesh& mesh, int a, int b, int keep);

// ----- I/O and generators ---------------------------------------------------

SimplexMesh read_mesh(const std::string& path);
void write_mesh(const SimplexMesh& mesh, const std::string& path);

// 1D segment mesh on [x0, x1] with n elements; tags: 0 = left, 1 = right
SimplexMesh segment_mesh(double x0, double x1, int n, int q);

// structured right-triangle mesh; tags: 0 = left, 1 = bottom, 2 = right,
// 3 = top; diag = +1 runs hypotenuses bottom-left to top-right
SimplexMesh rect_tri_mesh(double x0, double x1, double y0, double y1, int nx,
                          int ny, int q, int diag = +1);

// uniform red refinement (straight input mesh); each triangle -> 4,
// each segment -> 2; boundary tags and fixed flags are inherited
SimplexMesh refine_uniform(const SimplexMesh& mesh);

}  // namespace hoist
