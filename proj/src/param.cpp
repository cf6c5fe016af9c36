#include "hoist/param.hpp"

#include <Eigen/SVD>
#include <stdexcept>

namespace hoist {

std::vector<int> classify_node(const Vec& X, const PlanarBoundarySet& bset) {
  std::vector<int> active;
  for (int i = 0; i < int(bset.walls.size()); ++i) {
    const auto& w = bset.walls[i];
    if (std::abs(w.normal.dot(X) - w.offset) <= bset.tol) active.push_back(i);
  }
  if (!active.empty()) {
    Mat B(active.size(), X.size());
    for (size_t r = 0; r < active.size(); ++r)
      B.row(r) = bset.walls[active[r]].normal.transpose();
    Eigen::JacobiSVD<Mat> svd(B);
    double smin = svd.singularValues().tail(1)[0];
    if (int(active.size()) > X.size() || smin < 1e-10)
      throw std::runtime_error("redundant boundaries at a node (dependent normals)");
  }
  return active;
}

std::pair<std::vector<int>, std::vector<int>> select_unconstrained(const Mat& B) {
  int d = int(B.cols());
  int nc = int(B.rows());
  int nu = d - nc;
  std::vector<int> iu, ic;
  if (nu > 0) {
    // orthonormal null-space basis of B
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullV);
    Mat V = svd.matrixV().rightCols(nu);
    std::vector<bool> taken(d, false);
    for (int pick = 0; pick < nu; ++pick) {
      int best = -1;
      double best_val = std::numeric_limits<double>::max();
      for (int j = 0; j < d; ++j) {
        if (taken[j]) continue;
        Vec ej = Vec::Zero(d);
        ej[j] = 1.0;
        double val = (ej - V * (V.transpose() * ej)).norm();
        if (val < best_val - 1e-12) {
          best_val = val;
          best = j;
        }
      }
      taken[best] = true;
      iu.push_back(best);
    }
    std::sort(iu.begin(), iu.end());
  }
  for (int j = 0; j < d; ++j)
    if (std::find(iu.begin(), iu.end(), j) == iu.end()) ic.push_back(j);
  return {iu, ic};
}

namespace {

NodeConstraint make_constraint(const Vec& X, const std::vector<int>& active,
                               const PlanarBoundarySet& bset, bool fixed) {
  int d = int(X.size());
  NodeConstraint nc;
  nc.active = active;
  if (fixed || int(active.size()) == d) {
    for (int j = 0; j < d; ++j) nc.ic.push_back(j);
    nc.A = Mat(d, 0);
    nc.b = X;
    return nc;
  }
  if (active.empty()) {
    for (int j = 0; j < d; ++j) nc.iu.push_back(j);
    nc.A = Mat::Identity(d, d);
    nc.b = Vec::Zero(d);
    return nc;
  }
  Mat B(active.size(), d);
  for (size_t r = 0; r < active.size(); ++r)
    B.row(r) = bset.walls[active[r]].normal.transpose();
  auto [iu, ic] = select_unconstrained(B);
  nc.iu = iu;
  nc.ic = ic;
  Mat Y = Mat::Zero(d, ic.size()), Z = Mat::Zero(d, iu.size());
  for (size_t k = 0; k < ic.size(); ++k) Y(ic[k], k) = 1.0;
  for (size_t k = 0; k < iu.size(); ++k) Z(iu[k], k) = 1.0;
  Mat BY = B * Y;
  if (std::abs(BY.determinant()) < 1e-12) {
    // greedy pick left B Y singular; fall back to a subset with maximal
    // |det| (d <= 2 keeps this a tiny search)
    double best = -1;
    std::vector<int> best_ic;
    std::vector<int> idx(d);
    for (int j = 0; j < d; ++j) idx[j] = j;
    std::vector<bool> sel(d, false);
    std::fill(sel.begin(), sel.begin() + ic.size(), true);
    std::sort(sel.begin(), sel.end());
    do {
      std::vector<int> cand;
      for (int j = 0; j < d; ++j)
        if (sel[j]) cand.push_back(j);
      Mat Yc = Mat::Zero(d, cand.size());
      for (size_t k = 0; k < cand.size(); ++k) Yc(cand[k], k) = 1.0;
      double det = std::abs((B * Yc).determinant());
      if (det > best) {
        best = det;
        best_ic = cand;
      }
    } while (std::next_permutation(sel.begin(), sel.end()));
    nc.ic = best_ic;
    nc.iu.clear();
    for (int j = 0; j < d; ++j)
      if (std::find(best_ic.begin(), best_ic.end(), j) == best_ic.end()) nc.iu.push_back(j);
    Y = Mat::Zero(d, nc.ic.size());
    Z = Mat::Zero(d, nc.iu.size());
    for (size_t k = 0; k < nc.ic.size(); ++k) Y(nc.ic[k], k) = 1.0;
    for (size_t k = 0; k < nc.iu.size(); ++k) Z(nc.iu[k], k) = 1.0;
    BY = B * Y;
  }
  Mat BYinv = BY.inverse();
  nc.A = Z - Y * BYinv * (B * Z);
  nc.b = Y * BYinv * (B * X);
  return nc;
}

}  // namespace

ParamMap::ParamMap(const SimplexMesh& mesh, const PlanarBoundarySet& bset) {
  d_ = mesh.dim();
  int nv = mesh.n_nodes();
  nx_ = nv * d_;
  ref_ = mesh.ref_nodes();
  tol_ = bset.tol;
  nodes_.reserve(nv);
  y_off_.assign(nv, 0);
  int off = 0;
  for (int I = 0; I < nv; ++I) {
    Vec X = ref_.row(I).transpose();
    auto active = classify_node(X, bset);
    nodes_.push_back(make_constraint(X, active, bset, mesh.fixed()[I] != 0));
    y_off_[I] = off;
    off += int(nodes_.back().iu.size());
  }
  ny_ = off;
  b_ = Vec(nx_);
  std::vector<Eigen::Triplet<double>> trip;
  for (int I = 0; I < nv; ++I) {
    const auto& nc = nodes_[I];
    for (int c = 0; c < d_; ++c) {
      b_[I * d_ + c] = nc.b[c];
      for (size_t k = 0; k < nc.iu.size(); ++k)
        if (nc.A(c, k) != 0.0) trip.push_back({I * d_ + c, y_off_[I] + int(k), nc.A(c, k)});
    }
  }
  A_ = SpMat(nx_, ny_);
  A_.setFromTriplets(trip.begin(), trip.end());
}

Vec ParamMap::apply(const Vec& y) const { return A_ * y + b_; }

Vec ParamMap::invert(const Vec& x, double* residual) const {
  Vec y(ny_);
  double res = 0;
  int nv = nx_ / d_;
  for (int I = 0; I < nv; ++I) {
    const auto& nc = nodes_[I];
    for (size_t k = 0; k < nc.iu.size(); ++k) y[y_off_[I] + int(k)] = x[I * d_ + nc.iu[k]];
    if (!nc.ic.empty()) {
      // violation of the constrained components against the projected point
      Vec xi = x.segment(I * d_, d_);
      Vec xr = nc.iu.empty() ? nc.b : Vec(nc.A * y.segment(y_off_[I], nc.iu.size()) + nc.b);
      res = std::max(res, (xi - xr).lpNorm<Eigen::Infinity>());
    }
  }
  if (residual) *residual = res;
  return y;
}

Vec flatten_nodes(const Mat& nodes) {
  Vec x(nodes.rows() * nodes.cols());
  for (int i = 0; i < nodes.rows(); ++i)
    for (int c = 0; c < nodes.cols(); ++c) x[i * nodes.cols() + c] = nodes(i, c);
  return x;
}

Mat unflatten_nodes(const Vec& x, int d) {
  Mat nodes(x.size() / d, d);
  for (int i = 0; i < nodes.rows(); ++i)
    for (int c = 0; c < d; ++c) nodes(i, c) = x[i * d + c];
  return nodes;
}

}  // namespace hoist
