#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "gwmat/covmat.hpp"

using namespace gwmat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PointSet random_points(std::size_t n, int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(n * dim);
  for (auto& x : c) x = u(gen);
  return build_pointset(std::move(c), dim);
}

// dense n x n view of any SymmetricMatrix
std::vector<double> full(const SymmetricMatrix& m) {
  std::vector<double> a(std::size_t(m.n) * m.n, 0.0);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) a[std::size_t(i) * m.n + j] = m.at(i, j);
  return a;
}

// Gauss-Jordan inverse (test oracle only)
std::vector<double> invert(std::vector<double> a, int n) {
  std::vector<double> inv(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[std::size_t(i) * n + i] = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[std::size_t(r) * n + c]) >
          std::fabs(a[std::size_t(piv) * n + c]))
        piv = r;
    for (int k = 0; k < n; ++k) {
      std::swap(a[std::size_t(c) * n + k], a[std::size_t(piv) * n + k]);
      std::swap(inv[std::size_t(c) * n + k], inv[std::size_t(piv) * n + k]);
    }
    const double d = a[std::size_t(c) * n + c];
    for (int k = 0; k < n; ++k) {
      a[std::size_t(c) * n + k] /= d;
      inv[std::size_t(c) * n + k] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[std::size_t(r) * n + c];
      for (int k = 0; k < n; ++k) {
        a[std::size_t(r) * n + k] -= f * a[std::size_t(c) * n + k];
        inv[std::size_t(r) * n + k] -= f * inv[std::size_t(c) * n + k];
      }
    }
  }
  return inv;
}

}  // namespace

TEST_CASE("pointset construction and validation") {
  const PointSet ps = build_pointset({0.0, 0.0, 1.0, 0.0, 0.0, 1.0}, 2);
  CHECK(ps.size() == 3);
  CHECK_FALSE(ps.near_duplicates);
  CHECK_THAT(ps.distance(1, 2), WithinRel(std::sqrt(2.0), 1e-15));
  CHECK_THROWS_AS(build_pointset({0.0, 0.0, 1.0, 1.0, 0.0, 0.0}, 2),
                  std::domain_error);  // duplicate location
  CHECK_THROWS_AS(build_pointset({0.0, std::nan("")}, 2), std::domain_error);
  CHECK_THROWS_AS(build_pointset({0.0, 1.0, 2.0}, 2), std::domain_error);
  const PointSet close =
      build_pointset({0.0, 0.0, 1e-12, 0.0, 1.0, 1.0}, 2);
  CHECK(close.near_duplicates);
}

TEST_CASE("neighbor search matches all-pairs scan") {
  const PointSet ps = random_points(500, 2, 42);
  const auto got = neighbors_within(ps, 0.15);
  std::vector<NeighborPair> want;
  for (std::size_t i = 1; i < ps.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double d = ps.distance(i, j);
      if (d < 0.15) want.push_back({i, j, d});
    }
  REQUIRE(got.size() == want.size());
  for (std::size_t k = 0; k < got.size(); ++k) {
    CHECK(got[k].i == want[k].i);
    CHECK(got[k].j == want[k].j);
    CHECK(got[k].dist == want[k].dist);
  }
  // degenerate radii
  CHECK(neighbors_within(ps, 1e-7).empty());
  CHECK(neighbors_within(ps, 10.0).size() == 500 * 499 / 2);
}

TEST_CASE("assembly storage, pattern, and sparsity identity") {
  const CorrelationModel dense_model{MaternParams{1.0, 0.2}, 1.5, 0.0};
  const CorrelationModel compact{PhiParams{1.0, 4.0, 0.02, 2}, 2.0, 0.0};
  const PointSet one = build_pointset({0.3, 0.4}, 2);
  const auto m1 = assemble(one, dense_model);
  CHECK(m1.n == 1);
  CHECK(m1.at(0, 0) == 1.5);

  const PointSet ps = random_points(120, 2, 7);
  const auto md = assemble(ps, dense_model);
  CHECK_FALSE(md.sparse);
  const auto ms = assemble(ps, compact);
  CHECK(ms.sparse);
  const double delta = compact.support_radius();
  const auto pairs = neighbors_within(ps, delta);
  // exact geometric pattern and pair-count identity
  const auto stats = sparsity_stats(ms);
  CHECK(stats.percent_zero ==
        1.0 - 2.0 * double(pairs.size()) / (120.0 * 119.0));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(ms.at(i, i) == 2.0);
    for (std::size_t j = 0; j < i; ++j) {
      const double r = ps.distance(i, j);
      const double v = ms.at(i, j);
      if (r < delta) {
        CHECK_THAT(v, WithinRel(covariance(compact, r), 1e-15));
        CHECK(v == ms.at(j, i));
      } else {
        CHECK(v == 0.0);
      }
    }
  }
  // support below minimum distance -> diagonal matrix
  const CorrelationModel tiny{PhiParams{1.0, 4.0, 1e-6, 2}, 1.0, 0.0};
  const auto diag = assemble(ps, tiny);
  CHECK(sparsity_stats(diag).percent_zero == 1.0);
}

TEST_CASE("sparsity is monotone in mu") {
  const PointSet ps = random_points(300, 2, 11);
  double prev = -1.0;
  for (double mu : {1.5, 2.0, 3.0, 4.5}) {
    const CorrelationModel phi_m{PhiParams{0.0, mu, 0.03, 2}, 1.0, 0.0};
    const double pz = sparsity_stats(assemble(ps, phi_m)).percent_zero;
    if (prev >= 0.0) CHECK(pz <= prev);
    prev = pz;
  }
}

TEST_CASE("dense cholesky basics") {
  SymmetricMatrix eye;
  eye.n = 3;
  eye.dense = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const auto fi = cholesky(eye);
  CHECK(fi.logdet == 0.0);
  const auto x = solve(fi, {3.0, -1.0, 2.0});
  CHECK(x == std::vector<double>{3.0, -1.0, 2.0});

  SymmetricMatrix two;
  two.n = 2;
  const double rho = 0.6;
  two.dense = {1.0, rho, rho, 1.0};
  CHECK_THAT(cholesky(two).logdet, WithinRel(std::log(1.0 - rho * rho), 1e-14));

  SymmetricMatrix scaled;
  scaled.n = 4;
  scaled.dense.assign(16, 0.0);
  for (int i = 0; i < 4; ++i) scaled.dense[i * 4 + i] = 2.0;
  const auto f2 = cholesky(scaled);
  for (double v : solve(f2, {1.0, 1.0, 1.0, 1.0}))
    CHECK_THAT(v, WithinRel(0.5, 1e-15));

  SymmetricMatrix indef;
  indef.n = 2;
  indef.dense = {1.0, 2.0, 2.0, 1.0};
  try {
    cholesky(indef);
    FAIL("expected not_positive_definite_error");
  } catch (const not_positive_definite_error& e) {
    CHECK(e.pivot == 1);
  }
}

TEST_CASE("dense solve matches explicit inverse") {
  std::mt19937 gen(5);
  std::normal_distribution<double> nd;
  const int n = 50;
  std::vector<double> b(std::size_t(n) * n);
  for (auto& v : b) v = nd(gen);
  SymmetricMatrix a;
  a.n = n;
  a.dense.assign(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = (i == j) ? double(n) : 0.0;  // B B^T + n I
      for (int k = 0; k < n; ++k)
        s += b[std::size_t(i) * n + k] * b[std::size_t(j) * n + k];
      a.dense[std::size_t(i) * n + j] = s;
    }
  const auto f = cholesky(a);
  std::vector<double> rhs(n);
  for (auto& v : rhs) v = nd(gen);
  const auto x = solve(f, rhs);
  const auto inv = invert(a.dense, n);
  for (int i = 0; i < n; ++i) {
    double want = 0.0;
    for (int j = 0; j < n; ++j) want += inv[std::size_t(i) * n + j] * rhs[j];
    CHECK_THAT(x[i], WithinAbs(want, 1e-9));
  }
}

TEST_CASE("sparse factorization matches dense oracle") {
  const PointSet ps = random_points(300, 2, 99);
  const CorrelationModel model{PhiParams{1.0, 4.5, 0.02, 2}, 1.3, 0.1};
  const auto ms = assemble(ps, model);
  const auto md = assemble(ps, model, /*force_dense=*/true);
  REQUIRE(ms.sparse);
  REQUIRE_FALSE(md.sparse);
  CHECK(sparsity_stats(ms).percent_zero > 0.5);

  const auto fs = cholesky(ms);
  const auto fd = cholesky(md);
  CHECK_THAT(fs.logdet, WithinAbs(fd.logdet, 1e-8));

  std::mt19937 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> rhs(ps.size());
  for (auto& v : rhs) v = nd(gen);
  const auto xs = solve(fs, rhs);
  const auto xd = solve(fd, rhs);
  for (std::size_t i = 0; i < ps.size(); ++i)
    CHECK_THAT(xs[i], WithinAbs(xd[i], 1e-8));
  // residual check against the original matrix
  const auto back = matvec(ms, xs);
  for (std::size_t i = 0; i < ps.size(); ++i)
    CHECK_THAT(back[i], WithinAbs(rhs[i], 1e-9));
}

TEST_CASE("sparse factor reproduces the permuted matrix") {
  const PointSet ps = random_points(200, 2, 17);
  const CorrelationModel model{PhiParams{0.5, 3.5, 0.03, 2}, 1.0, 0.0};
  const auto m = assemble(ps, model);
  const auto f = cholesky(m);
  REQUIRE(f.sparse);
  const int n = m.n;
  // dense L from the CSC factor
  std::vector<double> L(std::size_t(n) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p)
      L[std::size_t(f.row_ind[p]) * n + j] = f.values[p];
  const auto a = full(m);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double llt = 0.0;
      for (int k = 0; k <= std::min(i, j); ++k)
        llt += L[std::size_t(i) * n + k] * L[std::size_t(j) * n + k];
      const double aij = a[std::size_t(f.perm[i]) * n + f.perm[j]];
      num += (aij - llt) * (aij - llt);
      den += aij * aij;
    }
  CHECK(std::sqrt(num / den) < 1e-10);
}

TEST_CASE("valid parameter region factors without pivot failure") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const PointSet ps = random_points(200, 2, 1000 + seed);
    const double nu = (seed % 3) * 0.75;
    const double mu = lambda_pd(2, nu) + 0.5 + seed * 0.1;
    const CorrelationModel model{PhiParams{nu, mu, 0.05, 2}, 1.0, 0.0};
    CHECK_NOTHROW(cholesky(assemble(ps, model)));
  }
}
