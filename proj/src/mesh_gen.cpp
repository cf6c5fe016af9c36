#include <map>
#include <stdexcept>

#include "hoist/mesh.hpp"

namespace hoist {

namespace {

// Build a degree-q mesh from straight vertex connectivity, placing edge and
// interior nodes equispaced. Edge nodes are shared through an edge table.
SimplexMesh build_from_vertices(int d, int q, const Mat& verts,
                                const std::vector<std::vector<int>>& conn,
                                const std::vector<std::array<int, 3>>& bfaces,
                                int n_btags) {
  int nv = int(verts.rows());
  std::vector<Vec> nodes;
  nodes.reserve(nv);
  for (int i = 0; i < nv; ++i) nodes.push_back(verts.row(i).transpose());

  std::map<std::pair<int, int>, std::vector<int>> edge_nodes;
  auto get_edge = [&](int u, int v) -> std::vector<int> {
    if (q < 2) return {};
    auto key = std::minmax(u, v);
    auto it = edge_nodes.find({key.first, key.second});
    if (it == edge_nodes.end()) {
      std::vector<int> ids;
      for (int j = 1; j < q; ++j) {
        double s = double(j) / q;
        nodes.push_back((1 - s) * nodes[key.first] + s * nodes[key.second]);
        ids.push_back(int(nodes.size()) - 1);
      }
      it = edge_nodes.insert({{key.first, key.second}, ids}).first;
    }
    std::vector<int> ids = it->second;
    if (u > v) std::reverse(ids.begin(), ids.end());
    return ids;
  };

  std::vector<std::vector<int>> elems;
  for (const auto& ev : conn) {
    std::vector<int> en(ev.begin(), ev.end());
    if (d == 1) {
      auto ho = get_edge(ev[0], ev[1]);
      en.insert(en.end(), ho.begin(), ho.end());
    } else {
      for (int le = 0; le < 3; ++le) {
        auto ho = get_edge(ev[le], ev[(le + 1) % 3]);
        en.insert(en.end(), ho.begin(), ho.end());
      }
      // interior nodes, matching the master layout
      for (int i = 1; i + 1 < q; ++i)
        for (int j = 1; i + j <= q - 1; ++j) {
          double xi = double(i) / q, eta = double(j) / q;
          nodes.push_back((1 - xi - eta) * nodes[ev[0]] + xi * nodes[ev[1]] +
                          eta * nodes[ev[2]]);
          en.push_back(int(nodes.size()) - 1);
        }
    }
    elems.push_back(en);
  }
  Mat all(nodes.size(), d);
  for (size_t i = 0; i < nodes.size(); ++i) all.row(i) = nodes[i].transpose();
  return SimplexMesh(d, q, all, all, elems, bfaces, n_btags);
}

}  // namespace

SimplexMesh segment_mesh(double x0, double x1, int n, int q) {
  Mat verts(n + 1, 1);
  for (int i = 0; i <= n; ++i) verts(i, 0) = x0 + (x1 - x0) * i / n;
  std::vector<std::vector<int>> conn;
  for (int e = 0; e < n; ++e) conn.push_back({e, e + 1});
  std::vector<std::array<int, 3>> bf = {{0, 0, 0}, {n - 1, 1, 1}};
  return build_from_vertices(1, q, verts, conn, bf, 2);
}

SimplexMesh rect_tri_mesh(double x0, double x1, double y0, double y1, int nx,
                          int ny, int q, int diag) {
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  Mat verts((nx + 1) * (ny + 1), 2);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      verts(vid(i, j), 0) = x0 + (x1 - x0) * i / nx;
      verts(vid(i, j), 1) = y0 + (y1 - y0) * j / ny;
    }
  std::vector<std::vector<int>> conn;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      if (diag >= 0) {
        conn.push_back({v00, v10, v11});
        conn.push_back({v00, v11, v01});
      } else {
        conn.push_back({v00, v10, v01});
        conn.push_back({v10, v11, v01});
      }
    }
  // tags: 0 = left, 1 = bottom, 2 = right, 3 = top
  std::vector<std::array<int, 3>> bf;
  for (int e = 0; e < int(conn.size()); ++e)
    for (int lf = 0; lf < 3; ++lf) {
      auto fv = face_vertices(2, lf);
      int u = conn[e][fv[0]], v = conn[e][fv[1]];
      double ux = verts(u, 0), uy = verts(u, 1), vx2 = verts(v, 0), vy = verts(v, 1);
      double tol = 1e-12 * (std::abs(x1 - x0) + std::abs(y1 - y0));
      if (std::abs(ux - x0) < tol && std::abs(vx2 - x0) < tol) bf.push_back({e, lf, 0});
      else if (std::abs(uy - y0) < tol && std::abs(vy - y0) < tol) bf.push_back({e, lf, 1});
      else if (std::abs(ux - x1) < tol && std::abs(vx2 - x1) < tol) bf.push_back({e, lf, 2});
      else if (std::abs(uy - y1) < tol && std::abs(vy - y1) < tol) bf.push_back({e, lf, 3});
    }
  return build_from_vertices(2, q, verts, conn, bf, 4);
}

SimplexMesh refine_uniform(const SimplexMesh& mesh) {
  int d = mesh.dim(), q = mesh.degree();
  int nv = 0;
  // vertex nodes of the coarse mesh come first in each element list
  std::vector<int> vert_ids;
  {
    std::vector<char> is_vert(mesh.n_nodes(), 0);
    for (int e = 0; e < mesh.n_elems(); ++e)
      for (int v = 0; v <= d; ++v) is_vert[mesh.elem_nodes(e)[v]] = 1;
    for (int n = 0; n < mesh.n_nodes(); ++n)
      if (is_vert[n]) vert_ids.push_back(n);
    nv = int(vert_ids.size());
  }
  std::vector<int> vmap(mesh.n_nodes(), -1);
  Mat verts(nv, d);
  std::vector<uint8_t> vfixed(nv, 0);
  for (int i = 0; i < nv; ++i) {
    vmap[vert_ids[i]] = i;
    verts.row(i) = mesh.phys_nodes().row(vert_ids[i]);
    vfixed[i] = mesh.fixed()[vert_ids[i]];
  }

  std::vector<std::vector<int>> conn;
  std::map<std::pair<int, int>, int> mid;
  std::vector<Vec> extra;
  auto midpoint = [&](int u, int v) {
    auto key = std::minmax(u, v);
    auto it = mid.find({key.first, key.second});
    if (it != mid.end()) return it->second;
    Vec x = 0.5 * (verts.row(u) + verts.row(v)).transpose();
    extra.push_back(x);
    int id = nv + int(extra.size()) - 1;
    mid[{key.first, key.second}] = id;
    return id;
  };

  std::map<std::pair<int, int>, int> edge_tag;  // coarse boundary edges
  for (const auto& f : mesh.faces()) {
    if (!f.boundary()) continue;
    auto fv = face_vertices(d, f.face_l);
    if (d == 1) {
      edge_tag[{vmap[mesh.elem_nodes(f.elem_l)[fv[0]]], -1}] = f.btag;
    } else {
      int u = vmap[mesh.elem_nodes(f.elem_l)[fv[0]]];
      int v = vmap[mesh.elem_nodes(f.elem_l)[fv[1]]];
      auto key = std::minmax(u, v);
      edge_tag[{key.first, key.second}] = f.btag;
    }
  }

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& en = mesh.elem_nodes(e);
    if (d == 1) {
      int v0 = vmap[en[0]], v1 = vmap[en[1]];
      int m = midpoint(v0, v1);
      conn.push_back({v0, m});
      conn.push_back({m, v1});
    } else {
      int v0 = vmap[en[0]], v1 = vmap[en[1]], v2 = vmap[en[2]];
      int m01 = midpoint(v0, v1), m12 = midpoint(v1, v2), m20 = midpoint(v2, v0);
      conn.push_back({v0, m01, m20});
      conn.push_back({v1, m12, m01});
      conn.push_back({v2, m20, m12});
      conn.push_back({m01, m12, m20});
    }
  }
  Mat allverts(nv + extra.size(), d);
  allverts.topRows(nv) = verts;
  for (size_t i = 0; i < extra.size(); ++i) allverts.row(nv + i) = extra[i].transpose();

  // boundary tags: a fine boundary edge has at least one coarse vertex pair
  // ancestor; look up via its endpoints' coarse edge (or endpoint in 1D)
  std::vector<std::array<int, 3>> bf;
  {
    std::map<std::vector<int>, std::vector<std::pair<int, int>>> incident;
    for (int e = 0; e < int(conn.size()); ++e)
      for (int lf = 0; lf <= d; ++lf) {
        std::vector<int> key;
        for (int lv : face_vertices(d, lf)) key.push_back(conn[e][lv]);
        std::sort(key.begin(), key.end());
        incident[key].push_back({e, lf});
      }
    for (auto& [key, inc] : incident) {
      if (inc.size() != 1) continue;
      int tag = -1;
      if (d == 1) {
        auto it = edge_tag.find({key[0], -1});
        if (it != edge_tag.end()) tag = it->second;
      } else {
        // find the coarse edge this fine edge lies on: the midpoint node
        // remembers its parents
        for (auto& [pk, m] : mid) {
          bool has_m = (key[0] == m || key[1] == m);
          bool has_p = (key[0] == pk.first || key[1] == pk.first || key[0] == pk.second ||
                        key[1] == pk.second);
          if (has_m && has_p) {
            auto it = edge_tag.find(pk);
            if (it != edge_tag.end()) tag = it->second;
            break;
          }
        }
      }
      if (tag < 0) throw std::runtime_error("refine_uniform: lost boundary tag");
      bf.push_back({inc[0].first, inc[0].second, tag});
    }
  }
  auto out = build_from_vertices(d, q, allverts, conn, bf, mesh.n_btags());
  for (int i = 0; i < nv; ++i)
    if (vfixed[i]) out.set_fixed(i, true);
  return out;
}

}  // namespace hoist
