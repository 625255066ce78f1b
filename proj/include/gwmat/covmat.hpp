#pragma once

// Point-set geometry, dense and sparse covariance assembly exploiting
// compact support, Cholesky factorization (dense left-looking, sparse
// reverse Cuthill-McKee + up-looking), triangular solves,
// log-determinant, and sparsity statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gwmat/kernels.hpp"

namespace gwmat {

struct not_positive_definite_error : std::runtime_error {
  int pivot;
  explicit not_positive_definite_error(int k)
      : std::runtime_error("matrix not positive definite at pivot " +
                           std::to_string(k)),
        pivot(k) {}
};

// ---------------------------------------------------------------------
// Point sets

struct PointSet {
  std::vector<double> coords;  // n * dim, row-major
  int dim = 2;
  // min pairwise distance < 1e-9 * bounding-box diameter (data likely
  // ill-conditioned; surfaced as a flag, not an error)
  bool near_duplicates = false;

  std::size_t size() const {
    return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0;
  }
  const double* point(std::size_t i) const { return coords.data() + i * dim; }
  double distance(std::size_t i, std::size_t j) const {
    const double* a = point(i);
    const double* b = point(j);
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }
  void bounding_box(double* lo, double* hi) const {
    const std::size_t n = size();
    for (int k = 0; k < dim; ++k) {
      lo[k] = coords[k];
      hi[k] = coords[k];
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double* p = point(i);
      for (int k = 0; k < dim; ++k) {
        lo[k] = std::min(lo[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    }
  }
  double diameter() const {
    double lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    bounding_box(lo, hi);
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    return std::sqrt(s);
  }
};

namespace detail {

// uniform-grid spatial bin: points closer than `cell` lie in the same or
// an adjacent cell
class GridIndex {
 public:
  // Cell keys are packed into 21 bits per axis; overflow wraps, which can
  // only merge buckets (extra distance-checked candidates), never lose a
  // neighbor, so no guard is needed.
  GridIndex(const PointSet& ps, double cell) : ps_(ps), cell_(cell) {
    ps.bounding_box(lo_, hi_);
    const std::size_t n = ps.size();
    cells_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) cells_[key(ps.point(i))].push_back(i);
  }

  // visit all j < i in the 3^dim cell neighborhood of point i
  template <class Visit>
  void for_candidates_below(std::size_t i, const Visit& visit) const {
    const double* p = ps_.point(i);
    long c[3] = {0, 0, 0};
    for (int k = 0; k < ps_.dim; ++k) c[k] = axis(p[k], k);
    long d[3] = {0, 0, 0};
    const long span = (ps_.dim > 2) ? 1 : 0;
    for (d[0] = -1; d[0] <= 1; ++d[0])
      for (d[1] = -(ps_.dim > 1 ? 1 : 0); d[1] <= (ps_.dim > 1 ? 1 : 0); ++d[1])
        for (d[2] = -span; d[2] <= span; ++d[2]) {
          const auto it = cells_.find(
              pack(c[0] + d[0], c[1] + d[1], c[2] + d[2]));
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second)
            if (j < i) visit(j);
        }
  }

 private:
  long axis(double x, int k) const {
    return static_cast<long>(std::floor((x - lo_[k]) / cell_));
  }
  static std::uint64_t pack(long x, long y, long z) {
    const std::uint64_t m = (1u << 21) - 1;
    return ((std::uint64_t(x + 2) & m) << 42) |
           ((std::uint64_t(y + 2) & m) << 21) | (std::uint64_t(z + 2) & m);
  }
  std::uint64_t key(const double* p) const {
    long c[3] = {0, 0, 0};
    for (int k = 0; k < ps_.dim; ++k) c[k] = axis(p[k], k);
    return pack(c[0], c[1], c[2]);
  }
  const PointSet& ps_;
  double cell_;
  double lo_[3] = {0, 0, 0}, hi_[3] = {0, 0, 0};
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace detail

// Validated construction: finite coordinates, n >= 1, exact-equality
// duplicate rejection, near-duplicate flag.
inline PointSet build_pointset(std::vector<double> coords, int dim) {
  if (dim < 1 || dim > 3) throw std::domain_error("build_pointset: dim in {1,2,3}");
  if (coords.empty() || coords.size() % dim != 0)
    throw std::domain_error("build_pointset: coords size must be n * dim, n >= 1");
  for (double c : coords)
    if (!std::isfinite(c))
      throw std::domain_error("build_pointset: non-finite coordinate");
  PointSet ps{std::move(coords), dim, false};
  const std::size_t n = ps.size();
  {
    std::unordered_set<std::string> seen;
    seen.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::string k(reinterpret_cast<const char*>(ps.point(i)),
                    sizeof(double) * dim);
      if (!seen.insert(std::move(k)).second)
        throw std::domain_error("build_pointset: duplicate location at index " +
                                std::to_string(i));
    }
  }
  const double diam = ps.diameter();
  if (n > 1 && diam > 0.0) {
    const double h = 1e-9 * diam;
    const detail::GridIndex grid(ps, h);
    for (std::size_t i = 1; i < n && !ps.near_duplicates; ++i)
      grid.for_candidates_below(i, [&](std::size_t j) {
        if (ps.distance(i, j) < h) ps.near_duplicates = true;
      });
  }
  return ps;
}

struct NeighborPair {
  std::size_t i, j;  // i > j
  double dist;
};

// Exactly the pairs with ||s_i - s_j|| < radius, grid-accelerated.
inline std::vector<NeighborPair> neighbors_within(const PointSet& ps,
                                                  double radius) {
  if (!(radius > 0.0)) throw std::domain_error("neighbors_within: radius > 0");
  const std::size_t n = ps.size();
  std::vector<NeighborPair> out;
  if (n < 2) return out;
  const detail::GridIndex grid(ps, radius);
  for (std::size_t i = 1; i < n; ++i)
    grid.for_candidates_below(i, [&](std::size_t j) {
      const double d = ps.distance(i, j);
      if (d < radius) out.push_back({i, j, d});
    });
  std::sort(out.begin(), out.end(), [](const NeighborPair& a, const NeighborPair& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return out;
}

// ---------------------------------------------------------------------
// Symmetric matrices

struct SymmetricMatrix {
  int n = 0;
  bool sparse = false;
  // dense: full n x n row-major (symmetric)
  std::vector<double> dense;
  // sparse: compressed-sparse-column lower triangle including the
  // diagonal; rows sorted ascending within each column, diagonal first
  std::vector<int> col_ptr, row_ind;
  std::vector<double> values;

  double at(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (!sparse) return dense[std::size_t(i) * n + j];
    for (int p = col_ptr[j]; p < col_ptr[j + 1]; ++p)
      if (row_ind[p] == i) return values[p];
    return 0.0;
  }
  double max_diagonal() const {
    double m = 0.0;
    if (sparse) {
      for (int j = 0; j < n; ++j) m = std::max(m, values[col_ptr[j]]);
    } else {
      for (int i = 0; i < n; ++i) m = std::max(m, dense[std::size_t(i) * n + i]);
    }
    return m;
  }
};

// Covariance assembly. Compactly supported models get sparse storage
// whose pattern is purely geometric: entry (i, j) is stored iff
// ||s_i - s_j|| < support (values below 1e-15 are stored as-is).
inline SymmetricMatrix assemble(const PointSet& ps, const CorrelationModel& m,
                                bool force_dense = false) {
  m.validate();
  const std::size_t n = ps.size();
  SymmetricMatrix out;
  out.n = static_cast<int>(n);
  const double support = m.support_radius();
  const double diag = m.sigma2;
  if (std::isinf(support) || force_dense) {
    out.sparse = false;
    out.dense.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      out.dense[i * n + i] = diag;
      for (std::size_t j = 0; j < i; ++j) {
        const double v = covariance(m, ps.distance(i, j));
        out.dense[i * n + j] = v;
        out.dense[j * n + i] = v;
      }
    }
    return out;
  }
  out.sparse = true;
  const auto pairs = neighbors_within(ps, support);
  // bucket by column j, diagonal first, rows ascending
  std::vector<int> count(n + 1, 0);
  for (const auto& p : pairs) ++count[p.j + 1];
  out.col_ptr.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j)
    out.col_ptr[j + 1] = out.col_ptr[j] + count[j + 1] + 1;
  out.row_ind.resize(out.col_ptr[n]);
  out.values.resize(out.col_ptr[n]);
  std::vector<int> fill(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.row_ind[out.col_ptr[j]] = static_cast<int>(j);
    out.values[out.col_ptr[j]] = diag;
    fill[j] = out.col_ptr[j] + 1;
  }
  for (const auto& p : pairs) {  // pairs sorted by (i, j): rows ascend per column
    out.row_ind[fill[p.j]] = static_cast<int>(p.i);
    out.values[fill[p.j]] = covariance(m, p.dist);
    ++fill[p.j];
  }
  return out;
}

struct SparsityStats {
  double percent_zero;  // off-diagonal zero fraction, both triangles
  std::size_t stored_nnz;
};

inline SparsityStats sparsity_stats(const SymmetricMatrix& m) {
  const std::size_t n = m.n;
  std::size_t nnz_off = 0;
  std::size_t stored = 0;
  if (m.sparse) {
    stored = m.values.size();
    nnz_off = 2 * (stored - n);  // both triangles, diagonal excluded
  } else {
    stored = n * n;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && m.dense[i * n + j] != 0.0) ++nnz_off;
  }
  const double denom = double(n) * double(n - 1);
  const double pz = (n < 2) ? 1.0 : 1.0 - double(nnz_off) / denom;
  return {pz, stored};
}

// coordinate-list debug dump (row, col, value), lower triangle
inline void write_coordinate_list(std::ostream& os, const SymmetricMatrix& m) {
  if (m.sparse) {
    for (int j = 0; j < m.n; ++j)
      for (int p = m.col_ptr[j]; p < m.col_ptr[j + 1]; ++p)
        os << m.row_ind[p] << ' ' << j << ' ' << m.values[p] << '\n';
  } else {
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j <= i; ++j)
        os << i << ' ' << j << ' ' << m.dense[std::size_t(i) * m.n + j] << '\n';
  }
}

// ---------------------------------------------------------------------
// Cholesky

struct CholeskyFactor {
  int n = 0;
  bool sparse = false;
  std::vector<int> perm;  // factor of A(perm, perm); identity when dense
  // dense: row-major lower triangle (full n x n buffer)
  std::vector<double> dense_l;
  // sparse: CSC lower-triangular L, diagonal first per column
  std::vector<int> col_ptr, row_ind;
  std::vector<double> values;
  double logdet = 0.0;
};

namespace detail {

// reverse Cuthill-McKee over the symmetric pattern of a lower CSC matrix
inline std::vector<int> rcm_order(const SymmetricMatrix& m) {
  const int n = m.n;
  // adjacency (both directions), diagonal dropped
  std::vector<std::vector<int>> adj(n);
  for (int j = 0; j < n; ++j)
    for (int p = m.col_ptr[j] + 1; p < m.col_ptr[j + 1]; ++p) {
      adj[j].push_back(m.row_ind[p]);
      adj[m.row_ind[p]].push_back(j);
    }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  const auto degree = [&](int v) { return static_cast<int>(adj[v].size()); };

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> visited(n, 0);
  std::vector<int> frontier, next;

  const auto bfs_last_level = [&](int root, std::vector<char>& seen) {
    // returns a min-degree vertex in the final BFS level from root
    std::fill(seen.begin(), seen.end(), 0);
    seen[root] = 1;
    frontier = {root};
    int best = root;
    while (!frontier.empty()) {
      next.clear();
      best = frontier[0];
      for (int v : frontier)
        if (degree(v) < degree(best)) best = v;
      for (int v : frontier)
        for (int w : adj[v])
          if (!seen[w]) {
            seen[w] = 1;
            next.push_back(w);
          }
      frontier.swap(next);
    }
    return best;
  };

  std::vector<char> seen(n, 0);
  for (int start = 0; start < n; ++start) {
    if (visited[start]) continue;
    // pseudo-peripheral root: min-degree seed, then the far end of a BFS
    int root = start;
    for (int v = start; v < n; ++v)
      if (!visited[v] && degree(v) < degree(root) && !visited[root]) root = v;
    root = bfs_last_level(root, seen);
    // Cuthill-McKee BFS with degree-sorted neighbor insertion
    std::size_t head = order.size();
    order.push_back(root);
    visited[root] = 1;
    while (head < order.size()) {
      const int v = order[head++];
      std::vector<int> fresh;
      for (int w : adj[v])
        if (!visited[w]) {
          visited[w] = 1;
          fresh.push_back(w);
        }
      std::sort(fresh.begin(), fresh.end(),
                [&](int a, int b) { return degree(a) < degree(b); });
      order.insert(order.end(), fresh.begin(), fresh.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

// permuted lower-triangular pattern B = A(perm, perm), CSC, rows sorted,
// diagonal first
inline SymmetricMatrix permute_lower(const SymmetricMatrix& m,
                                     const std::vector<int>& perm) {
  const int n = m.n;
  std::vector<int> inv(n);
  for (int i = 0; i < n; ++i) inv[perm[i]] = i;
  SymmetricMatrix out;
  out.n = n;
  out.sparse = true;
  std::vector<std::vector<std::pair<int, double>>> cols(n);
  for (int j = 0; j < n; ++j)
    for (int p = m.col_ptr[j]; p < m.col_ptr[j + 1]; ++p) {
      int a = inv[m.row_ind[p]];
      int b = inv[j];
      if (a < b) std::swap(a, b);
      cols[b].push_back({a, m.values[p]});
    }
  out.col_ptr.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) {
    std::sort(cols[j].begin(), cols[j].end());
    out.col_ptr[j + 1] = out.col_ptr[j] + static_cast<int>(cols[j].size());
  }
  out.row_ind.resize(out.col_ptr[n]);
  out.values.resize(out.col_ptr[n]);
  for (int j = 0; j < n; ++j) {
    int p = out.col_ptr[j];
    for (const auto& e : cols[j]) {
      out.row_ind[p] = e.first;
      out.values[p] = e.second;
      ++p;
    }
  }
  return out;
}

// elimination tree of a lower CSC pattern (needs row access = CSC of the
// transpose, built here once)
struct RowView {
  std::vector<int> ptr, col;
  std::vector<double> val;
};

inline RowView rows_of_lower(const SymmetricMatrix& m) {
  const int n = m.n;
  RowView r;
  r.ptr.assign(n + 1, 0);
  for (int j = 0; j < n; ++j)
    for (int p = m.col_ptr[j]; p < m.col_ptr[j + 1]; ++p)
      ++r.ptr[m.row_ind[p] + 1];
  for (int i = 0; i < n; ++i) r.ptr[i + 1] += r.ptr[i];
  r.col.resize(r.ptr[n]);
  r.val.resize(r.ptr[n]);
  std::vector<int> fill(r.ptr.begin(), r.ptr.end() - 1);
  for (int j = 0; j < n; ++j)
    for (int p = m.col_ptr[j]; p < m.col_ptr[j + 1]; ++p) {
      const int i = m.row_ind[p];
      r.col[fill[i]] = j;
      r.val[fill[i]] = m.values[p];
      ++fill[i];
    }
  return r;  // columns ascend per row; last entry of row k is the diagonal
}

inline std::vector<int> etree(const RowView& rows, int n) {
  std::vector<int> parent(n, -1), ancestor(n, -1);
  for (int k = 0; k < n; ++k) {
    for (int p = rows.ptr[k]; p < rows.ptr[k + 1]; ++p) {
      int i = rows.col[p];
      while (i != -1 && i < k) {
        const int inext = ancestor[i];
        ancestor[i] = k;
        if (inext == -1) parent[i] = k;
        i = inext;
      }
    }
  }
  return parent;
}

// nonzero pattern of row k of L in topological order; returns the start
// index into `stack` (pattern occupies [top, n))
inline int ereach(const RowView& rows, const std::vector<int>& parent, int k,
                  std::vector<int>& stack, std::vector<int>& mark) {
  int top = static_cast<int>(mark.size());
  const int n = top;
  mark[k] = k;
  std::vector<int> path;
  for (int p = rows.ptr[k]; p < rows.ptr[k + 1]; ++p) {
    int i = rows.col[p];
    if (i >= k) continue;
    path.clear();
    while (mark[i] != k) {
      path.push_back(i);
      mark[i] = k;
      i = parent[i];
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) stack[--top] = *it;
  }
  (void)n;
  return top;
}

}  // namespace detail

inline CholeskyFactor cholesky(const SymmetricMatrix& m) {
  CholeskyFactor f;
  f.n = m.n;
  const int n = m.n;
  const double pivot_floor = 1e-14 * m.max_diagonal();
  if (!m.sparse) {
    f.sparse = false;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;
    f.dense_l.assign(std::size_t(n) * n, 0.0);
    auto* L = f.dense_l.data();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = m.dense[std::size_t(i) * n + j];
        const double* li = L + std::size_t(i) * n;
        const double* lj = L + std::size_t(j) * n;
        for (int k = 0; k < j; ++k) s -= li[k] * lj[k];
        if (i == j) {
          if (s <= pivot_floor) throw not_positive_definite_error(i);
          L[std::size_t(i) * n + i] = std::sqrt(s);
          f.logdet += std::log(s);
        } else {
          L[std::size_t(i) * n + j] = s / lj[j];
        }
      }
    }
    return f;
  }

  f.sparse = true;
  f.perm = detail::rcm_order(m);
  const SymmetricMatrix b = detail::permute_lower(m, f.perm);
  const detail::RowView rows = detail::rows_of_lower(b);
  const std::vector<int> parent = detail::etree(rows, n);

  // symbolic pass: column counts of L
  std::vector<int> mark(n, -1), stack(n), count(n, 0);
  for (int k = 0; k < n; ++k) {
    const int top = detail::ereach(rows, parent, k, stack, mark);
    for (int t = top; t < n; ++t) ++count[stack[t]];
  }
  f.col_ptr.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) f.col_ptr[j + 1] = f.col_ptr[j] + count[j] + 1;
  f.row_ind.resize(f.col_ptr[n]);
  f.values.resize(f.col_ptr[n]);
  std::vector<int> fill(n);
  for (int j = 0; j < n; ++j) {
    f.row_ind[f.col_ptr[j]] = j;  // diagonal slot
    fill[j] = f.col_ptr[j] + 1;
  }

  // numeric up-looking pass: row k solves L(0:k-1,0:k-1) x = B(k, 0:k-1)
  std::fill(mark.begin(), mark.end(), -1);
  std::vector<double> y(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double d = 0.0;
    for (int p = rows.ptr[k]; p < rows.ptr[k + 1]; ++p) {
      if (rows.col[p] == k)
        d = rows.val[p];
      else
        y[rows.col[p]] = rows.val[p];
    }
    const int top = detail::ereach(rows, parent, k, stack, mark);
    for (int t = top; t < n; ++t) {
      const int j = stack[t];
      const double xj = y[j] / f.values[f.col_ptr[j]];
      y[j] = 0.0;
      for (int p = f.col_ptr[j] + 1; p < fill[j]; ++p)
        y[f.row_ind[p]] -= f.values[p] * xj;
      d -= xj * xj;
      f.row_ind[fill[j]] = k;
      f.values[fill[j]] = xj;
      ++fill[j];
    }
    if (d <= pivot_floor) throw not_positive_definite_error(k);
    f.values[f.col_ptr[k]] = std::sqrt(d);
    f.logdet += std::log(d);
  }
  return f;
}

inline std::vector<double> solve(const CholeskyFactor& f,
                                 const std::vector<double>& rhs) {
  const int n = f.n;
  if (static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("solve: dimension mismatch");
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = rhs[f.perm[i]];
  if (!f.sparse) {
    const auto* L = f.dense_l.data();
    for (int i = 0; i < n; ++i) {
      double s = y[i];
      const double* li = L + std::size_t(i) * n;
      for (int k = 0; k < i; ++k) s -= li[k] * y[k];
      y[i] = s / li[i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= L[std::size_t(k) * n + i] * y[k];
      y[i] = s / L[std::size_t(i) * n + i];
    }
  } else {
    for (int j = 0; j < n; ++j) {  // forward: L z = y
      y[j] /= f.values[f.col_ptr[j]];
      for (int p = f.col_ptr[j] + 1; p < f.col_ptr[j + 1]; ++p)
        y[f.row_ind[p]] -= f.values[p] * y[j];
    }
    for (int j = n - 1; j >= 0; --j) {  // backward: L^T w = z
      double s = y[j];
      for (int p = f.col_ptr[j] + 1; p < f.col_ptr[j + 1]; ++p)
        s -= f.values[p] * y[f.row_ind[p]];
      y[j] = s / f.values[f.col_ptr[j]];
    }
  }
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[f.perm[i]] = y[i];
  return x;
}

// symmetric matrix-vector product (verification and scoring helper)
inline std::vector<double> matvec(const SymmetricMatrix& m,
                                  const std::vector<double>& x) {
  const int n = m.n;
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(n, 0.0);
  if (!m.sparse) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += m.dense[std::size_t(i) * n + j] * x[j];
      y[i] = s;
    }
  } else {
    for (int j = 0; j < n; ++j) {
      y[j] += m.values[m.col_ptr[j]] * x[j];
      for (int p = m.col_ptr[j] + 1; p < m.col_ptr[j + 1]; ++p) {
        const int i = m.row_ind[p];
        y[i] += m.values[p] * x[j];
        y[j] += m.values[p] * x[i];
      }
    }
  }
  return y;
}

}  // namespace gwmat
