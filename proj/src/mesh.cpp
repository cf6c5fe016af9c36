#include "hoist/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace hoist {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

// face key = sorted vertex ids of the face
std::vector<int> face_key(const std::vector<int>& elem, int d, int lf) {
  std::vector<int> key;
  for (int lv : face_vertices(d, lf)) key.push_back(elem[lv]);
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace

SimplexMesh::SimplexMesh(int dim, int q, Mat ref_nodes, Mat phys_nodes,
                         std::vector<std::vector<int>> elems,
                         std::vector<std::array<int, 3>> boundary_faces, int n_btags)
    : dim_(dim),
      q_(q),
      n_btags_(n_btags),
      ref_nodes_(std::move(ref_nodes)),
      phys_nodes_(std::move(phys_nodes)),
      elems_(std::move(elems)),
      geom_basis_(dim, q) {
  fixed_.assign(n_nodes(), 0);
  measure_rule_ = simplex_quadrature(dim_, 2 * q_ + 2);
  Mat bn = geom_basis_.nodes();
  sample_pts_ = Mat(measure_rule_.points.rows() + bn.rows(), dim_);
  sample_pts_ << measure_rule_.points, bn;
  build_adjacency(boundary_faces);
}

void SimplexMesh::build_adjacency(const std::vector<std::array<int, 3>>& boundary_faces) {
  std::map<std::vector<int>, int> btags;
  for (const auto& bf : boundary_faces) {
    if (bf[0] < 0 || bf[0] >= n_elems() || bf[1] < 0 || bf[1] > dim_)
      throw std::runtime_error("boundary face references invalid element/face");
    btags[face_key(elems_[bf[0]], dim_, bf[1])] = bf[2];
  }
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> incident;
  for (int e = 0; e < n_elems(); ++e) {
    if (int(elems_[e].size()) != nodes_per_elem())
      throw std::runtime_error("element has wrong node count");
    for (int n : elems_[e])
      if (n < 0 || n >= n_nodes()) throw std::runtime_error("node index out of range");
    for (int lf = 0; lf <= dim_; ++lf)
      incident[face_key(elems_[e], dim_, lf)].push_back({e, lf});
  }
  faces_.clear();
  elem_face_.assign(n_elems(), {-1, -1, -1});
  for (auto& [key, inc] : incident) {
    if (inc.size() > 2) throw std::runtime_error("face shared by more than two elements");
    FaceInfo fi;
    fi.elem_l = inc[0].first;
    fi.face_l = inc[0].second;
    if (inc.size() == 2) {
      fi.elem_r = inc[1].first;
      fi.face_r = inc[1].second;
      if (btags.count(key)) throw std::runtime_error("interior face carries a boundary tag");
    } else {
      auto it = btags.find(key);
      if (it == btags.end()) throw std::runtime_error("untagged boundary face");
      fi.btag = it->second;
      if (fi.btag < 0 || fi.btag >= n_btags_) throw std::runtime_error("boundary tag out of range");
    }
    int fid = int(faces_.size());
    faces_.push_back(fi);
    elem_face_[fi.elem_l][fi.face_l] = fid;
    if (fi.elem_r >= 0) elem_face_[fi.elem_r][fi.face_r] = fid;
  }
}

Mat SimplexMesh::map_ref(int e, const Mat& xi) const {
  Mat psi = geom_basis_.eval(xi);
  Mat coords(nodes_per_elem(), dim_);
  for (int i = 0; i < nodes_per_elem(); ++i) coords.row(i) = ref_nodes_.row(elems_[e][i]);
  return psi * coords;
}

Mat SimplexMesh::map_phys(int e, const Mat& xi) const {
  Mat psi = geom_basis_.eval(xi);
  Mat coords(nodes_per_elem(), dim_);
  for (int i = 0; i < nodes_per_elem(); ++i) coords.row(i) = phys_nodes_.row(elems_[e][i]);
  return psi * coords;
}

void SimplexMesh::mapping_jacobian(int e, const Vec& xi, Mat& G, double& g) const {
  Mat pt = xi.transpose();
  auto dpsi = geom_basis_.grad(pt);
  Mat Jx = Mat::Zero(dim_, dim_), JX = Mat::Zero(dim_, dim_);
  for (int i = 0; i < nodes_per_elem(); ++i) {
    int n = elems_[e][i];
    for (int c = 0; c < dim_; ++c)
      for (int k = 0; k < dim_; ++k) {
        Jx(c, k) += phys_nodes_(n, c) * dpsi[k](0, i);
        JX(c, k) += ref_nodes_(n, c) * dpsi[k](0, i);
      }
  }
  G = Jx * JX.inverse();
  g = G.determinant();
}

ElementMeasures SimplexMesh::element_measures(int e) const {
  ElementMeasures m;
  const auto& rule = measure_rule_;
  auto dpsi = geom_basis_.grad(rule.points);
  int nn = nodes_per_elem();
  Mat xr(nn, dim_), xp(nn, dim_);
  for (int i = 0; i < nn; ++i) {
    xr.row(i) = ref_nodes_.row(elems_[e][i]);
    xp.row(i) = phys_nodes_.row(elems_[e][i]);
  }
  for (int q = 0; q < rule.points.rows(); ++q) {
    Mat JX = Mat::Zero(dim_, dim_), Jx = Mat::Zero(dim_, dim_);
    for (int i = 0; i < nn; ++i)
      for (int c = 0; c < dim_; ++c)
        for (int k = 0; k < dim_; ++k) {
          JX(c, k) += xr(i, c) * dpsi[k](q, i);
          Jx(c, k) += xp(i, c) * dpsi[k](q, i);
        }
    m.v0 += rule.weights[q] * JX.determinant();
    m.v += rule.weights[q] * Jx.determinant();
  }
  auto edges = elem_edges(e);
  m.l_min = std::numeric_limits<double>::max();
  m.l_max = 0;
  for (auto& ed : edges) {
    double l = (phys_nodes_.row(ed[0]) - phys_nodes_.row(ed[1])).norm();
    m.l_min = std::min(m.l_min, l);
    m.l_max = std::max(m.l_max, l);
  }
  auto dpsis = geom_basis_.grad(sample_pts_);
  m.g_inf = std::numeric_limits<double>::max();
  m.g_sup = -std::numeric_limits<double>::max();
  for (int q = 0; q < sample_pts_.rows(); ++q) {
    Mat JX = Mat::Zero(dim_, dim_), Jx = Mat::Zero(dim_, dim_);
    for (int i = 0; i < nn; ++i)
      for (int c = 0; c < dim_; ++c)
        for (int k = 0; k < dim_; ++k) {
          JX(c, k) += xr(i, c) * dpsis[k](q, i);
          Jx(c, k) += xp(i, c) * dpsis[k](q, i);
        }
    double g = Jx.determinant() / JX.determinant();
    m.g_inf = std::min(m.g_inf, g);
    m.g_sup = std::max(m.g_sup, g);
  }
  return m;
}

std::vector<std::array<int, 2>> SimplexMesh::elem_edges(int e) const {
  const auto& en = elems_[e];
  if (dim_ == 1) return {{en[0], en[1]}};
  return {{en[0], en[1]}, {en[1], en[2]}, {en[2], en[0]}};
}

bool SimplexMesh::invert_map(int e, const Vec& x, bool physical, Vec& xi,
                             double slack) const {
  xi = Vec::Constant(dim_, 1.0 / (dim_ + 1));
  const Mat& coords = physical ? phys_nodes_ : ref_nodes_;
  int nn = nodes_per_elem();
  Mat xc(nn, dim_);
  for (int i = 0; i < nn; ++i) xc.row(i) = coords.row(elems_[e][i]);
  for (int it = 0; it < 50; ++it) {
    Mat pt = xi.transpose();
    Mat psi = geom_basis_.eval(pt);
    auto dpsi = geom_basis_.grad(pt);
    Vec f = (psi * xc).transpose() - x;
    Mat J = Mat::Zero(dim_, dim_);
    for (int i = 0; i < nn; ++i)
      for (int c = 0; c < dim_; ++c)
        for (int k = 0; k < dim_; ++k) J(c, k) += xc(i, c) * dpsi[k](0, i);
    Vec dxi = J.fullPivLu().solve(f);
    xi -= dxi;
    if (dxi.norm() < 1e-14 * (1.0 + xi.norm())) break;
  }
  double lo = -slack, sum = 0;
  for (int k = 0; k < dim_; ++k) {
    if (xi[k] < lo) return false;
    sum += xi[k];
  }
  return sum <= 1.0 + slack;
}

bool SimplexMesh::locate(const Vec& x, int& e, Vec& xi) const {
  double diam = bbox_diameter();
  for (int cand = 0; cand < n_elems(); ++cand) {
    Vec lo = Vec::Constant(dim_, std::numeric_limits<double>::max());
    Vec hi = -lo;
    for (int n : elems_[cand])
      for (int c = 0; c < dim_; ++c) {
        lo[c] = std::min(lo[c], phys_nodes_(n, c));
        hi[c] = std::max(hi[c], phys_nodes_(n, c));
      }
    double margin = 0.2 * (hi - lo).norm() + 1e-12 * diam;
    bool in_box = true;
    for (int c = 0; c < dim_; ++c)
      in_box = in_box && x[c] >= lo[c] - margin && x[c] <= hi[c] + margin;
    if (!in_box) continue;
    if (invert_map(cand, x, true, xi, 1e-9)) {
      e = cand;
      return true;
    }
  }
  return false;
}

void SimplexMesh::straighten_element(int e, bool physical) {
  if (q_ == 1) return;
  Mat& coords = physical ? phys_nodes_ : ref_nodes_;
  const Mat& mn = geom_basis_.nodes();
  const auto& en = elems_[e];
  for (int i = dim_ + 1; i < nodes_per_elem(); ++i) {
    // barycentric interpolation of the vertices at the master node location
    Vec lam(dim_ + 1);
    lam[0] = 1.0;
    for (int k = 0; k < dim_; ++k) {
      lam[k + 1] = mn(i, k);
      lam[0] -= mn(i, k);
    }
    Vec x = Vec::Zero(dim_);
    for (int v = 0; v <= dim_; ++v) x += lam[v] * coords.row(en[v]).transpose();
    coords.row(en[i]) = x.transpose();
  }
}

double SimplexMesh::bbox_diameter() const {
  Vec lo = ref_nodes_.colwise().minCoeff();
  Vec hi = ref_nodes_.colwise().maxCoeff();
  return (hi - lo).norm();
}

void SimplexMesh::validate() const {
  for (int e = 0; e < n_elems(); ++e) {
    std::set<int> verts(elems_[e].begin(), elems_[e].begin() + dim_ + 1);
    if (int(verts.size()) != dim_ + 1)
      throw std::runtime_error("element with repeated vertices");
    auto m = element_measures(e);
    double scale = std::pow(std::abs(m.v0) + 1e-300, 1.0);
    if (m.v0 <= 0) throw std::runtime_error("non-positive reference element volume");
    (void)scale;
    // reference mapping must be non-degenerate on the sample set
    int nn = nodes_per_elem();
    Mat xr(nn, dim_);
    for (int i = 0; i < nn; ++i) xr.row(i) = ref_nodes_.row(elems_[e][i]);
    auto dpsis = geom_basis_.grad(sample_pts_);
    for (int q = 0; q < sample_pts_.rows(); ++q) {
      Mat JX = Mat::Zero(dim_, dim_);
      for (int i = 0; i < nn; ++i)
        for (int c = 0; c < dim_; ++c)
          for (int k = 0; k < dim_; ++k) JX(c, k) += xr(i, c) * dpsis[k](q, i);
      if (JX.determinant() <= 0)
        throw std::runtime_error("inverted reference element");
    }
  }
}

// ----- edge collapse ---------------------------------------------------------

namespace {

struct EdgeData {
  std::vector<int> nodes;  // high-order nodes ordered min(u,v) -> max(u,v)
};

// per-edge high-order node table of a mesh
std::map<EdgeKey, EdgeData> build_edge_table(const SimplexMesh& mesh) {
  std::map<EdgeKey, EdgeData> table;
  int d = mesh.dim(), q = mesh.degree();
  if (q < 2) {
    for (int e = 0; e < mesh.n_elems(); ++e)
      for (auto& ed : mesh.elem_edges(e)) table[edge_key(ed[0], ed[1])];
    return table;
  }
  int n_local_edges = (d == 1) ? 1 : 3;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& en = mesh.elem_nodes(e);
    for (int le = 0; le < n_local_edges; ++le) {
      int a = (d == 1) ? en[0] : en[le];
      int b = (d == 1) ? en[1] : en[(le + 1) % 3];
      std::vector<int> ho;
      int base = (d + 1) + le * (q - 1);
      for (int j = 0; j < q - 1; ++j) ho.push_back(en[base + j]);  // a -> b order
      if (a > b) std::reverse(ho.begin(), ho.end());
      table[edge_key(a, b)] = EdgeData{ho};
    }
  }
  return table;
}

std::set<int> boundary_vertices(const SimplexMesh& mesh) {
  std::set<int> bv;
  for (const auto& f : mesh.faces())
    if (f.boundary())
      for (int lv : face_vertices(mesh.dim(), f.face_l))
        bv.insert(mesh.elem_nodes(f.elem_l)[lv]);
  return bv;
}

bool is_boundary_edge(const SimplexMesh& mesh, int a, int b) {
  for (const auto& f : mesh.faces()) {
    if (!f.boundary()) continue;
    auto fv = face_vertices(mesh.dim(), f.face_l);
    std::set<int> vs;
    for (int lv : fv) vs.insert(mesh.elem_nodes(f.elem_l)[lv]);
    if (mesh.dim() == 2 && vs.count(a) && vs.count(b)) return true;
  }
  return false;
}

double straight_ref_volume(const SimplexMesh& mesh, const std::vector<int>& verts) {
  const Mat& X = mesh.ref_nodes();
  if (mesh.dim() == 1) return X(verts[1], 0) - X(verts[0], 0);
  double ax = X(verts[1], 0) - X(verts[0], 0), ay = X(verts[1], 1) - X(verts[0], 1);
  double bx = X(verts[2], 0) - X(verts[0], 0), by = X(verts[2], 1) - X(verts[0], 1);
  return 0.5 * (ax * by - ay * bx);
}

}  // namespace

CollapseError check_collapse(const SimplexMesh& mesh, int a, int b, int keep) {
  int d = mesh.dim();
  int rm = (keep == a) ? b : a;
  std::vector<int> on_edge;  // elements containing both endpoints as vertices
  std::set<int> na, nb;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& en = mesh.elem_nodes(e);
    bool has_a = false, has_b = false;
    for (int v = 0; v <= d; ++v) {
      if (en[v] == a) has_a = true;
      if (en[v] == b) has_b = true;
    }
    if (has_a && has_b) on_edge.push_back(e);
    if (has_a)
      for (int v = 0; v <= d; ++v)
        if (en[v] != a) na.insert(en[v]);
    if (has_b)
      for (int v = 0; v <= d; ++v)
        if (en[v] != b) nb.insert(en[v]);
  }
  if (on_edge.empty()) return CollapseError::not_an_edge;
  if (int(on_edge.size()) == mesh.n_elems()) return CollapseError::empty_mesh;

  if (d == 2) {
    std::set<int> apexes;
    for (int e : on_edge)
      for (int v = 0; v < 3; ++v) {
        int n = mesh.elem_nodes(e)[v];
        if (n != a && n != b) apexes.insert(n);
      }
    std::set<int> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                          std::inserter(common, common.begin()));
    common.erase(a);
    common.erase(b);
    if (common != apexes) return CollapseError::duplicate_element;

    auto bv = boundary_vertices(mesh);
    if (bv.count(a) && bv.count(b) && !is_boundary_edge(mesh, a, b))
      return CollapseError::boundary_pinch;
  }

  // reference fold-over: surviving elements containing rm, with rm -> keep
  // and straight sides, must keep positive orientation
  for (int e = 0; e < mesh.n_elems(); ++e) {
    if (std::find(on_edge.begin(), on_edge.end(), e) != on_edge.end()) continue;
    const auto& en = mesh.elem_nodes(e);
    bool touches = false;
    std::vector<int> verts(d + 1);
    for (int v = 0; v <= d; ++v) {
      verts[v] = (en[v] == rm) ? keep : en[v];
      if (en[v] == rm) touches = true;
    }
    if (!touches) continue;
    if (straight_ref_volume(mesh, verts) <= 0) return CollapseError::inverted_reference;
  }
  return CollapseError::ok;
}

std::optional<CollapseResult> collapse_edge(const SimplexMesh& mesh, int a, int b,
                                            int keep, CollapseError* err_out) {
  auto fail = [&](CollapseError e) -> std::optional<CollapseResult> {
    if (err_out) *err_out = e;
    return std::nullopt;
  };
  CollapseError pre = check_collapse(mesh, a, b, keep);
  if (pre != CollapseError::ok) return fail(pre);

  int d = mesh.dim(), q = mesh.degree();
  int rm = (keep == a) ? b : a;
  auto old_edges = build_edge_table(mesh);

  // boundary tags keyed by face vertex sets, with rm renamed to keep
  std::map<std::vector<int>, int> tag_map;
  for (const auto& f : mesh.faces()) {
    if (!f.boundary()) continue;
    std::vector<int> key;
    for (int lv : face_vertices(d, f.face_l)) {
      int n = mesh.elem_nodes(f.elem_l)[lv];
      key.push_back(n == rm ? keep : n);
    }
    std::sort(key.begin(), key.end());
    tag_map[key] = f.btag;
  }

  // surviving edge table: un-renamed edges win collisions (kept side)
  std::map<EdgeKey, EdgeData> new_edges;
  std::vector<std::pair<EdgeKey, EdgeKey>> renamed;  // old key -> new key
  for (auto& [key, data] : old_edges) {
    if ((key.first == a && key.second == b) || (key.first == b && key.second == a))
      continue;  // the collapsed edge itself disappears
    if (key.first != rm && key.second != rm) new_edges[key] = data;
  }
  for (auto& [key, data] : old_edges) {
    if (key.first != rm && key.second != rm) continue;
    if (key.first == std::min(a, b) && key.second == std::max(a, b)) continue;
    EdgeKey nk = edge_key(key.first == rm ? keep : key.first,
                          key.second == rm ? keep : key.second);
    if (!new_edges.count(nk)) {
      // ride along: reorder nodes for the new key direction; the old
      // direction min->max maps through the rename
      EdgeData data2 = data;
      int old_lo_renamed = (key.first == rm) ? keep : key.first;
      if (old_lo_renamed != nk.first) std::reverse(data2.nodes.begin(), data2.nodes.end());
      new_edges[nk] = data2;
    }
    renamed.push_back({key, nk});
  }

  // rebuild element node lists on old node ids
  std::vector<std::vector<int>> new_elems_old_ids;
  std::vector<int> elem_map(mesh.n_elems(), -1);
  std::vector<int> deleted;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& en = mesh.elem_nodes(e);
    bool has_a = false, has_b = false;
    for (int v = 0; v <= d; ++v) {
      if (en[v] == a) has_a = true;
      if (en[v] == b) has_b = true;
    }
    if (has_a && has_b) {
      deleted.push_back(e);
      continue;
    }
    std::vector<int> nn(en.begin(), en.end());
    for (int v = 0; v <= d; ++v)
      if (nn[v] == rm) nn[v] = keep;
    if (q >= 2 && d == 2) {
      for (int le = 0; le < 3; ++le) {
        int u = nn[le], v = nn[(le + 1) % 3];
        const auto& data = new_edges.at(edge_key(u, v));
        std::vector<int> ho = data.nodes;  // min -> max order
        if (u > v) std::reverse(ho.begin(), ho.end());
        for (int j = 0; j < q - 1; ++j) nn[3 + le * (q - 1) + j] = ho[j];
      }
    }
    elem_map[e] = int(new_elems_old_ids.size());
    new_elems_old_ids.push_back(nn);
  }

  // duplicate-element safety net (link condition should prevent this)
  {
    std::set<std::vector<int>> seen;
    for (auto& en : new_elems_old_ids) {
      std::vector<int> key(en.begin(), en.begin() + d + 1);
      std::sort(key.begin(), key.end());
      if (!seen.insert(key).second) return fail(CollapseError::duplicate_element);
    }
  }

  // compact node ids
  std::set<int> used;
  for (auto& en : new_elems_old_ids) used.insert(en.begin(), en.end());
  std::vector<int> node_map(mesh.n_nodes(), -1);
  std::vector<int> old_of_new(used.size(), -1);
  Mat ref(used.size(), d), phys(used.size(), d);
  int next = 0;
  for (int n : used) {
    node_map[n] = next;
    old_of_new[next] = n;
    ref.row(next) = mesh.ref_nodes().row(n);
    phys.row(next) = mesh.phys_nodes().row(n);
    ++next;
  }
  node_map[rm] = node_map[keep];
  // merged-away edge nodes map to their kept partners
  for (auto& [ok, nk] : renamed) {
    auto it_old = old_edges.find(ok);
    auto it_new = new_edges.find(nk);
    if (it_old == old_edges.end() || it_new == new_edges.end()) continue;
    const auto& on = it_old->second.nodes;
    std::vector<int> tgt = it_new->second.nodes;
    int old_lo_renamed = (ok.first == rm) ? keep : ok.first;
    if (old_lo_renamed != nk.first) std::reverse(tgt.begin(), tgt.end());
    for (size_t j = 0; j < on.size(); ++j)
      if (node_map[on[j]] < 0) node_map[on[j]] = node_map[tgt[j]];
  }

  std::vector<std::vector<int>> new_elems;
  for (auto& en : new_elems_old_ids) {
    std::vector<int> nn;
    for (int n : en) nn.push_back(node_map[n]);
    new_elems.push_back(nn);
  }

  // recover boundary faces of the new connectivity
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> incident;
  for (int e = 0; e < int(new_elems.size()); ++e)
    for (int lf = 0; lf <= d; ++lf) incident[face_key(new_elems[e], d, lf)].push_back({e, lf});
  std::vector<std::array<int, 3>> bfaces;
  for (auto& [key, inc] : incident) {
    if (inc.size() != 1) continue;
    // translate new-id key back to old ids for the tag lookup
    std::vector<int> old_key;
    for (int nid : key) old_key.push_back(old_of_new[nid]);
    std::sort(old_key.begin(), old_key.end());
    auto it = tag_map.find(old_key);
    if (it == tag_map.end()) return fail(CollapseError::boundary_pinch);
    bfaces.push_back({inc[0].first, inc[0].second, it->second});
  }

  CollapseResult result{SimplexMesh(d, q, ref, phys, new_elems, bfaces, mesh.n_btags()),
                        node_map, elem_map, deleted};
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (node_map[n] >= 0 && n != rm)
      result.mesh.set_fixed(node_map[n], mesh.fixed()[n]);

  // reference straightening of every element whose vertex set changed
  if (q >= 2) {
    for (int e = 0; e < int(new_elems.size()); ++e) {
      bool affected = false;
      for (int v = 0; v <= d; ++v)
        if (result.mesh.elem_nodes(e)[v] == node_map[keep]) affected = true;
      if (affected) result.mesh.straighten_element(e, false);
    }
  }
  return result;
}

}  // namespace hoist
