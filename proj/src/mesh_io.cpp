#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hoist/mesh.hpp"

namespace hoist {

SimplexMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  int dim, q, n_nodes, n_elems, n_btags;
  if (!(in >> dim >> q >> n_nodes >> n_elems >> n_btags))
    throw std::runtime_error("bad mesh header in " + path);
  Mat coords(n_nodes, dim);
  for (int i = 0; i < n_nodes; ++i)
    for (int c = 0; c < dim; ++c)
      if (!(in >> coords(i, c))) throw std::runtime_error("bad node line in " + path);
  int npe = simplex_basis_size(dim, q);
  std::vector<std::vector<int>> elems(n_elems, std::vector<int>(npe));
  for (int e = 0; e < n_elems; ++e)
    for (int i = 0; i < npe; ++i)
      if (!(in >> elems[e][i])) throw std::runtime_error("bad element line in " + path);
  int n_bfaces;
  if (!(in >> n_bfaces)) throw std::runtime_error("missing boundary face count in " + path);
  std::vector<std::array<int, 3>> bfaces(n_bfaces);
  for (auto& bf : bfaces)
    if (!(in >> bf[0] >> bf[1] >> bf[2]))
      throw std::runtime_error("bad boundary face line in " + path);
  int n_fixed;
  if (!(in >> n_fixed)) throw std::runtime_error("missing fixed node count in " + path);
  std::vector<int> fixed(n_fixed);
  for (auto& f : fixed)
    if (!(in >> f)) throw std::runtime_error("bad fixed node line in " + path);

  SimplexMesh mesh(dim, q, coords, coords, elems, bfaces, n_btags);
  for (int f : fixed) mesh.set_fixed(f, true);
  mesh.validate();
  return mesh;
}

void write_mesh(const SimplexMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  char buf[64];
  out << mesh.dim() << " " << mesh.degree() << " " << mesh.n_nodes() << " "
      << mesh.n_elems() << " " << mesh.n_btags() << "\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    for (int c = 0; c < mesh.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", mesh.phys_nodes()(i, c));
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& en = mesh.elem_nodes(e);
    for (size_t i = 0; i < en.size(); ++i) out << (i ? " " : "") << en[i];
    out << "\n";
  }
  std::vector<std::array<int, 3>> bfaces;
  for (const auto& f : mesh.faces())
    if (f.boundary()) bfaces.push_back({f.elem_l, f.face_l, f.btag});
  out << bfaces.size() << "\n";
  for (auto& bf : bfaces) out << bf[0] << " " << bf[1] << " " << bf[2] << "\n";
  std::vector<int> fixed;
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (mesh.fixed()[n]) fixed.push_back(n);
  out << fixed.size() << "\n";
  for (int f : fixed) out << f << "\n";
}

}  // namespace hoist
