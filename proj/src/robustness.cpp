#include "hoist/robustness.hpp"

#include <algorithm>
#include <set>

namespace hoist {

namespace {

// reference-measure quadrature weights of one element
Vec ref_weights(const SimplexMesh& mesh, int e, const QuadRule& rule,
                const std::vector<Mat>& dgeo) {
  int d = mesh.dim();
  const auto& en = mesh.elem_nodes(e);
  Vec w(rule.points.rows());
  for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
    Mat J = Mat::Zero(d, d);
    for (int i = 0; i < mesh.nodes_per_elem(); ++i)
      for (int c = 0; c < d; ++c)
        for (int k = 0; k < d; ++k) J(c, k) += mesh.ref_nodes()(en[i], c) * dgeo[k](qpt, i);
    w[qpt] = rule.weights[qpt] * J.determinant();
  }
  return w;
}

}  // namespace

std::vector<int> detect_removal(const SimplexMesh& mesh, const RobustnessParams& rob,
                                std::vector<int>* triggers) {
  std::vector<int> out;
  if (triggers) triggers->clear();
  for (int e = 0; e < mesh.n_elems(); ++e) {
    auto m = mesh.element_measures(e);
    int trig = 0;
    if (m.v <= rob.c1 * m.v0) trig |= 1;
    if (std::min(m.v0, m.v) <= rob.c2) trig |= 2;
    if (m.l_min <= rob.c3 * m.l_max) trig |= 4;
    if (m.g_inf <= rob.c4 * m.g_sup) trig |= 8;
    if (trig) {
      out.push_back(e);
      if (triggers) triggers->push_back(trig);
    }
  }
  return out;
}

std::vector<int> detect_ill(const SimplexMesh& mesh, double c4p) {
  std::vector<int> out;
  if (mesh.degree() < 2) return out;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    auto m = mesh.element_measures(e);
    if (m.g_inf <= c4p * m.g_sup) out.push_back(e);
  }
  return out;
}

namespace {

// walls of the boundary set satisfied at a reference position
bool walls_satisfied_at(const PlanarBoundarySet& walls, const std::vector<int>& which,
                        const Vec& X) {
  for (int w : which)
    if (std::abs(walls.walls[w].normal.dot(X) - walls.walls[w].offset) > walls.tol)
      return false;
  return true;
}

double vertex_solution_range(const HoistState& st, int v) {
  double lo = std::numeric_limits<double>::max(), hi = -lo;
  NodalBasis basis(st.mesh.dim(), st.space.p);
  for (int e = 0; e < st.mesh.n_elems(); ++e) {
    const auto& en = st.mesh.elem_nodes(e);
    for (int lv = 0; lv <= st.mesh.dim(); ++lv) {
      if (en[lv] != v) continue;
      // chi(u) at the master vertex
      Mat xi(1, st.mesh.dim());
      for (int c = 0; c < st.mesh.dim(); ++c) xi(0, c) = (lv == 0) ? 0.0 : (lv - 1 == c ? 1.0 : 0.0);
      Mat vals = basis.eval(xi);
      double chi = 0;
      for (int j = 0; j < st.space.np; ++j) chi += vals(0, j) * st.u[st.space.dof(e, j, 0)];
      lo = std::min(lo, chi);
      hi = std::max(hi, chi);
    }
  }
  return (hi > lo) ? hi - lo : 0.0;
}

}  // namespace

int choose_endpoint(const HoistState& state, int a, int b) {
  const auto& mesh = state.mesh;
  Vec Xa = mesh.ref_nodes().row(a).transpose();
  Vec Xb = mesh.ref_nodes().row(b).transpose();
  auto act_a = classify_node(Xa, state.walls);
  auto act_b = classify_node(Xb, state.walls);
  bool fix_a = mesh.fixed()[a], fix_b = mesh.fixed()[b];

  // keeping K moves the other endpoint onto K; that endpoint must stay on
  // all of its boundaries and must not be pinned
  bool can_keep_a = !fix_b && walls_satisfied_at(state.walls, act_b, Xa);
  bool can_keep_b = !fix_a && walls_satisfied_at(state.walls, act_a, Xb);
  if (!can_keep_a && !can_keep_b) return -1;
  if (can_keep_a != can_keep_b) return can_keep_a ? a : b;

  int ca = int(act_a.size()) + (fix_a ? 100 : 0);
  int cb = int(act_b.size()) + (fix_b ? 100 : 0);
  if (ca != cb) return ca > cb ? a : b;
  double ra = vertex_solution_range(state, a), rb = vertex_solution_range(state, b);
  if (std::abs(ra - rb) > 1e-14 * std::max(1.0, std::max(ra, rb))) return ra > rb ? a : b;
  return std::min(a, b);
}

RemovalReport remove_elements(HoistState& state, const RobustnessParams& rob) {
  RemovalReport rep;
  std::vector<int> trig0;
  auto flagged = detect_removal(state.mesh, rob, &trig0);
  if (flagged.empty()) return rep;
  int cap = 3 * int(flagged.size());

  // skipped elements tracked by sorted vertex keys (ids shift per collapse)
  std::set<std::vector<int>> skipped;
  auto elem_key = [&](const SimplexMesh& mesh, int e) {
    std::vector<int> key(mesh.elem_nodes(e).begin(),
                         mesh.elem_nodes(e).begin() + mesh.dim() + 1);
    std::sort(key.begin(), key.end());
    return key;
  };

  for (int pass = 0; pass < cap; ++pass) {
    std::vector<int> trig;
    auto cand = detect_removal(state.mesh, rob, &trig);
    // drop skipped, pick the worst v/v0 ratio
    int pick = -1, pick_trig = 0;
    double worst = std::numeric_limits<double>::max();
    for (size_t i = 0; i < cand.size(); ++i) {
      if (skipped.count(elem_key(state.mesh, cand[i]))) continue;
      auto mm = state.mesh.element_measures(cand[i]);
      double ratio = mm.v / mm.v0;
      if (ratio < worst) {
        worst = ratio;
        pick = cand[i];
        pick_trig = trig[i];
      }
    }
    if (pick < 0) break;

    // edges by ascending physical endpoint distance
    auto edges = state.mesh.elem_edges(pick);
    std::sort(edges.begin(), edges.end(), [&](const auto& e1, const auto& e2) {
      double l1 = (state.mesh.phys_nodes().row(e1[0]) - state.mesh.phys_nodes().row(e1[1])).norm();
      double l2 = (state.mesh.phys_nodes().row(e2[0]) - state.mesh.phys_nodes().row(e2[1])).norm();
      return l1 < l2;
    });
    bool collapsed = false;
    for (auto& ed : edges) {
      int keep = choose_endpoint(state, ed[0], ed[1]);
      if (keep < 0) continue;
      auto res = collapse_edge(state.mesh, ed[0], ed[1], keep);
      if (!res) continue;
      // transfer the DG solution by dropping removed-element blocks
      int blk = state.space.np * state.space.m;
      Vec u_new(res->mesh.n_elems() * blk);
      for (int e = 0; e < state.mesh.n_elems(); ++e)
        if (res->elem_map[e] >= 0)
          u_new.segment(res->elem_map[e] * blk, blk) = state.u.segment(e * blk, blk);
      // remap skip keys
      std::set<std::vector<int>> skipped_new;
      for (auto key : skipped) {
        bool alive = true;
        for (auto& n : key) {
          n = res->node_map[n];
          if (n < 0) alive = false;
        }
        if (alive) {
          std::sort(key.begin(), key.end());
          skipped_new.insert(key);
        }
      }
      skipped = std::move(skipped_new);
      rep.collapses.push_back({pick, ed[0], ed[1], keep, pick_trig});
      rep.n_removed_elems += int(res->deleted_elems.size());
      state.mesh = std::move(res->mesh);
      state.space.n_elems = state.mesh.n_elems();
      state.u = std::move(u_new);
      collapsed = true;
      break;
    }
    if (!collapsed) {
      skipped.insert(elem_key(state.mesh, pick));
      rep.skipped.push_back(pick);
    }
  }

  if (rep.n_removed_elems > 0 || !rep.collapses.empty()) {
    state.pm = ParamMap(state.mesh, state.walls);
    state.y = state.pm.invert(flatten_nodes(state.mesh.phys_nodes()));
  }
  return rep;
}

namespace {

// sqrt of the relative top-mode energy per element; exactly representable
// projections (constants) return 0
Vec sensor_fraction(const SimplexMesh& mesh, const DgSpace& space, const Vec& u) {
  Vec q = Vec::Zero(mesh.n_elems());
  if (space.p < 1) return q;
  int d = mesh.dim();
  Vec proj = project_solution(mesh, u, space.m, space.p, space.p - 1);
  int np_lo = simplex_basis_size(d, space.p - 1);
  QuadRule rule = simplex_quadrature(d, 2 * space.p + 2 * mesh.degree());
  NodalBasis hi(d, space.p), lo(d, space.p - 1), geo(d, mesh.degree());
  Mat phi_hi = hi.eval(rule.points), phi_lo = lo.eval(rule.points);
  auto dgeo = geo.grad(rule.points);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    Vec w = ref_weights(mesh, e, rule, dgeo);
    double num = 0, den = 0;
    for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
      double chi = 0, chi_lo = 0;
      for (int j = 0; j < space.np; ++j) chi += phi_hi(qpt, j) * u[space.dof(e, j, 0)];
      for (int j = 0; j < np_lo; ++j)
        chi_lo += phi_lo(qpt, j) * proj[(e * np_lo + j) * space.m + 0];
      num += w[qpt] * (chi - chi_lo) * (chi - chi_lo);
      den += w[qpt] * chi * chi;
    }
    if (den <= 0.0 || num <= 1e-28 * den) continue;  // exact projection
    q[e] = std::sqrt(num / den);
  }
  return q;
}

}  // namespace

Vec shock_sensor(const SimplexMesh& mesh, const DgSpace& space, const Vec& u) {
  Vec q = sensor_fraction(mesh, space, u);
  Vec s = Vec::Constant(mesh.n_elems(), -std::numeric_limits<double>::infinity());
  for (int e = 0; e < mesh.n_elems(); ++e)
    if (q[e] > 0.0) s[e] = std::log10(q[e]);
  return s;
}

std::vector<int> reinit_sets(const SimplexMesh& mesh, const DgSpace& space, const Vec& u,
                             const RobustnessParams& rob, bool force) {
  // thresholds compare against the linear energy fraction (the log-scale
  // sensor is non-positive, so positive tabulated thresholds apply here)
  Vec q = sensor_fraction(mesh, space, u);
  std::set<int> out;
  if (force) {
    double qmax = q.maxCoeff();
    if (qmax <= 0.0) return {};
    for (int e = 0; e < mesh.n_elems(); ++e)
      if (q[e] >= rob.c6 * qmax) out.insert(e);
  } else {
    std::set<int> osc;
    for (int e = 0; e < mesh.n_elems(); ++e)
      if (q[e] >= rob.c5) osc.insert(e);
    out = osc;
    for (const auto& f : mesh.faces()) {
      if (f.boundary()) continue;
      if (osc.count(f.elem_l)) out.insert(f.elem_r);
      if (osc.count(f.elem_r)) out.insert(f.elem_l);
    }
  }
  return {out.begin(), out.end()};
}

double mean_face_jump(const SimplexMesh& mesh, const DgSpace& space, const Vec& u,
                      int face_id) {
  const auto& fi = mesh.faces()[face_id];
  if (fi.boundary()) return 0.0;
  int d = mesh.dim(), q = mesh.degree();
  NodalBasis trial(d, space.p), line(1, q);
  if (d == 1) {
    // point face: jump of the traces at the shared vertex
    Mat xl = face_to_simplex(1, fi.face_l, Vec::Zero(1));
    Mat xr = face_to_simplex(1, fi.face_r, Vec::Zero(1));
    Mat tl = trial.eval(xl), tr = trial.eval(xr);
    double ul = 0, ur = 0;
    for (int j = 0; j < space.np; ++j) {
      ul += tl(0, j) * u[space.dof(fi.elem_l, j, 0)];
      ur += tr(0, j) * u[space.dof(fi.elem_r, j, 0)];
    }
    return ul - ur;
  }
  auto rule = gauss_legendre_01(space.p + q + 1);
  auto chain_loc = face_nodes(2, q, fi.face_l);
  auto col = [&](int pos) { return pos == 0 ? 0 : (pos == q ? 1 : 1 + pos); };
  Mat g1 = line.eval(rule.points), dg1 = line.grad(rule.points)[0];
  double num = 0, den = 0;
  for (int sq = 0; sq < rule.points.rows(); ++sq) {
    Vec tan = Vec::Zero(2);
    for (size_t k = 0; k < chain_loc.size(); ++k) {
      int gn = mesh.elem_nodes(fi.elem_l)[chain_loc[k]];
      tan += dg1(sq, col(int(k))) * mesh.ref_nodes().row(gn).transpose();
    }
    double sigma = tan.norm();
    Vec sp(1);
    sp << rule.points(sq, 0);
    Mat xi_l = face_to_simplex(2, fi.face_l, sp);
    Vec sp_rev(1);
    sp_rev << 1.0 - rule.points(sq, 0);
    Mat xi_r = face_to_simplex(2, fi.face_r, sp_rev);
    Mat tl = trial.eval(xi_l), tr = trial.eval(xi_r);
    double ul = 0, ur = 0;
    for (int j = 0; j < space.np; ++j) {
      ul += tl(0, j) * u[space.dof(fi.elem_l, j, 0)];
      ur += tr(0, j) * u[space.dof(fi.elem_r, j, 0)];
    }
    num += rule.weights[sq] * sigma * (ul - ur);
    den += rule.weights[sq] * sigma;
  }
  return num / den;
}

Vec reinit_value(const SimplexMesh& mesh, const DgSpace& space, const Vec& u, int K,
                 double c7) {
  int d = mesh.dim();
  std::vector<int> patch = {K};
  for (int lf = 0; lf <= d; ++lf) {
    int fid = mesh.elem_face_id(K, lf);
    const auto& fi = mesh.faces()[fid];
    if (fi.boundary()) continue;
    int nbr = (fi.elem_l == K) ? fi.elem_r : fi.elem_l;
    if (std::abs(mean_face_jump(mesh, space, u, fid)) <= c7) patch.push_back(nbr);
  }
  QuadRule rule = simplex_quadrature(d, space.p + 2 * mesh.degree());
  NodalBasis trial(d, space.p), geo(d, mesh.degree());
  Mat phi = trial.eval(rule.points);
  auto dgeo = geo.grad(rule.points);
  Vec acc = Vec::Zero(space.m);
  double vol = 0;
  for (int e : patch) {
    Vec w = ref_weights(mesh, e, rule, dgeo);
    for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
      for (int c = 0; c < space.m; ++c) {
        double val = 0;
        for (int j = 0; j < space.np; ++j) val += phi(qpt, j) * u[space.dof(e, j, c)];
        acc[c] += w[qpt] * val;
      }
      vol += w[qpt];
    }
  }
  return acc / vol;
}

UpsilonReport apply_upsilon(HoistState& state, const RobustnessParams& rob, int k, int M,
                            double norm_r, bool force_reinit) {
  UpsilonReport rep;
  if (k > M) return rep;

  rep.removal = remove_elements(state, rob);
  if (rep.removal.n_removed_elems > 0) rep.modified = true;

  rep.straightened = detect_ill(state.mesh, rob.c4p);
  for (int e : rep.straightened) state.mesh.straighten_element(e, true);
  if (!rep.straightened.empty()) {
    state.y = state.pm.invert(flatten_nodes(state.mesh.phys_nodes()));
    rep.modified = true;
  }

  if (rob.reinit_enabled && state.space.p >= 1 && norm_r > rob.c8) {
    rep.reinitialized = reinit_sets(state.mesh, state.space, state.u, rob, force_reinit);
    if (!rep.reinitialized.empty()) {
      // compute all patch averages on the pre-reset solution, then apply
      std::vector<Vec> vals;
      for (int K : rep.reinitialized)
        vals.push_back(reinit_value(state.mesh, state.space, state.u, K, rob.c7));
      for (size_t i = 0; i < rep.reinitialized.size(); ++i) {
        int K = rep.reinitialized[i];
        for (int j = 0; j < state.space.np; ++j)
          for (int c = 0; c < state.space.m; ++c)
            state.u[state.space.dof(K, j, c)] = vals[i][c];
        if (rob.straighten_reinit) state.mesh.straighten_element(K, true);
      }
      if (rob.straighten_reinit)
        state.y = state.pm.invert(flatten_nodes(state.mesh.phys_nodes()));
      rep.modified = true;
    }
  }
  return rep;
}

}  // namespace hoist
