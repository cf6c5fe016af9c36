#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "hoist/basis.hpp"

using namespace hoist;

namespace {

Mat random_simplex_points(int d, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat pts(n, d);
  for (int i = 0; i < n; ++i) {
    if (d == 1) {
      pts(i, 0) = u(rng);
    } else {
      double a = u(rng), b = u(rng);
      if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      pts(i, 0) = a;
      pts(i, 1) = b;
    }
  }
  return pts;
}

double monomial_integral_triangle(int i, int j) {
  // int over unit triangle of x^i y^j = i! j! / (i+j+2)!
  return std::exp(std::lgamma(i + 1) + std::lgamma(j + 1) - std::lgamma(i + j + 3));
}

}  // namespace

TEST_CASE("quadrature weights sum to simplex volume") {
  for (int deg : {1, 3, 8, 14}) {
    auto q1 = simplex_quadrature(1, deg);
    CHECK(q1.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    auto q2 = simplex_quadrature(2, deg);
    CHECK(q2.weights.sum() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(q2.weights.minCoeff() > 0.0);
  }
}

TEST_CASE("quadrature integrates monomials to declared exactness") {
  for (int deg : {2, 5, 9, 14}) {
    auto q = simplex_quadrature(2, deg);
    for (int i = 0; i <= q.exactness; ++i)
      for (int j = 0; i + j <= q.exactness; ++j) {
        double val = 0;
        for (int k = 0; k < q.points.rows(); ++k)
          val += q.weights[k] * std::pow(q.points(k, 0), i) * std::pow(q.points(k, 1), j);
        double ref = monomial_integral_triangle(i, j);
        CHECK(std::abs(val - ref) <= 1e-12 * std::abs(ref));
      }
    auto ql = simplex_quadrature(1, deg);
    for (int i = 0; i <= ql.exactness; ++i) {
      double val = 0;
      for (int k = 0; k < ql.points.rows(); ++k)
        val += ql.weights[k] * std::pow(ql.points(k, 0), i);
      CHECK(std::abs(val - 1.0 / (i + 1)) <= 1e-12 / (i + 1));
    }
  }
}

TEST_CASE("orthonormal basis is orthonormal under quadrature") {
  for (int d : {1, 2}) {
    for (int k : {1, 2, 3, 4}) {
      OrthoBasis ob{d, k};
      auto q = simplex_quadrature(d, 2 * k + 1);
      Mat phi = ob.eval(q.points);
      Mat gram = phi.transpose() * q.weights.asDiagonal() * phi;
      CHECK((gram - Mat::Identity(ob.size(), ob.size())).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("nodal basis Kronecker and partition of unity") {
  for (int d : {1, 2}) {
    for (int k : {0, 1, 2, 3, 4}) {
      NodalBasis nb(d, k);
      Mat at_nodes = nb.eval(nb.nodes());
      CHECK((at_nodes - Mat::Identity(nb.size(), nb.size())).cwiseAbs().maxCoeff() < 1e-12);
      Mat pts = random_simplex_points(d, 20, 42 + d + k);
      Mat vals = nb.eval(pts);
      for (int i = 0; i < pts.rows(); ++i)
        CHECK(std::abs(vals.row(i).sum() - 1.0) < 1e-12);
      // gradients of the partition of unity vanish
      auto g = nb.grad(pts);
      for (int c = 0; c < d; ++c)
        for (int i = 0; i < pts.rows(); ++i)
          CHECK(std::abs(g[c].row(i).sum()) < 1e-10);
    }
  }
}

TEST_CASE("nodal basis gradient matches finite differences") {
  for (int d : {1, 2}) {
    NodalBasis nb(d, 3);
    Mat pts = random_simplex_points(d, 5, 7 + d);
    pts *= 0.5;  // keep interior so FD stays inside
    pts.array() += 0.2;
    auto g = nb.grad(pts);
    double h = 1e-6;
    for (int i = 0; i < pts.rows(); ++i)
      for (int c = 0; c < d; ++c) {
        Mat pp = pts.row(i), pm = pts.row(i);
        pp(0, c) += h;
        pm(0, c) -= h;
        Mat vp = nb.eval(pp), vm = nb.eval(pm);
        for (int j = 0; j < nb.size(); ++j) {
          double fd = (vp(0, j) - vm(0, j)) / (2 * h);
          CHECK(g[c](i, j) == doctest::Approx(fd).epsilon(1e-6));
        }
      }
  }
}

TEST_CASE("face topology consistency") {
  for (int k : {1, 2, 3}) {
    Mat nodes = simplex_nodes(2, k);
    for (int f = 0; f < 3; ++f) {
      auto fn = face_nodes(2, k, f);
      Vec s(int(fn.size()));
      for (int i = 0; i < int(fn.size()); ++i) s[i] = double(i) / k;
      Mat expect = face_to_simplex(2, f, s);
      for (int i = 0; i < int(fn.size()); ++i) {
        CHECK(nodes(fn[i], 0) == doctest::Approx(expect(i, 0)).epsilon(1e-14));
        CHECK(nodes(fn[i], 1) == doctest::Approx(expect(i, 1)).epsilon(1e-14));
      }
    }
  }
  CHECK(face_master_normal(2, 0).isApprox((Vec(2) << 0, -1).finished()));
  CHECK(face_master_normal(2, 1).isApprox((Vec(2) << 1, 1).finished()));
  CHECK(face_master_normal(2, 2).isApprox((Vec(2) << -1, 0).finished()));
}
