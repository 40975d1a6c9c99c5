#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nullot::testsupport {

bool coupling_is_monotone(const DiscreteCoupling& c, const AtomicMarginal& mu0,
                          const AtomicMarginal& mu1, double tol) {
  for (int i = 0; i < c.m; ++i) {
    for (int j = 0; j < c.n; ++j) {
      if (c.at(i, j) <= tol) continue;
      for (int i2 = 0; i2 < c.m; ++i2) {
        if (!(mu0.position[i] < mu0.position[i2])) continue;
        for (int j2 = 0; j2 < c.n; ++j2) {
          if (c.at(i2, j2) <= tol) continue;
          if (mu1.position[j2] < mu1.position[j] - tol) return false;
        }
      }
    }
  }
  return true;
}

namespace {

// Vertices of the transportation polytope are the basic solutions: acyclic
// sets of (allowed) arcs whose unique flow reproduces the marginals with
// non-negative values. Enumerate acyclic arc subsets of size <= m+n-1 and
// solve each by leaf elimination.

struct Arc {
  int i, j;
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int k = 0; k < n; ++k) parent[k] = k;
  }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

bool solve_on_support(const std::vector<Arc>& arcs, const AtomicMarginal& mu0,
                      const AtomicMarginal& mu1, DiscreteCoupling& out) {
  const int m = static_cast<int>(mu0.mass.size());
  const int n = static_cast<int>(mu1.mass.size());
  out.m = m;
  out.n = n;
  out.pi.assign(static_cast<std::size_t>(m * n), 0.0);
  std::vector<double> row = mu0.mass, col = mu1.mass;
  std::vector<char> used(arcs.size(), 0);
  std::vector<int> row_deg(m, 0), col_deg(n, 0);
  for (const Arc& a : arcs) {
    ++row_deg[a.i];
    ++col_deg[a.j];
  }
  std::size_t remaining = arcs.size();
  while (remaining > 0) {
    bool progressed = false;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (used[k]) continue;
      const Arc& a = arcs[k];
      const bool row_leaf = row_deg[a.i] == 1;
      const bool col_leaf = col_deg[a.j] == 1;
      if (!row_leaf && !col_leaf) continue;
      const double q = row_leaf ? row[a.i] : col[a.j];
      if (q < -1e-12) return false;
      out.at(a.i, a.j) = std::max(q, 0.0);
      row[a.i] -= q;
      col[a.j] -= q;
      used[k] = 1;
      --row_deg[a.i];
      --col_deg[a.j];
      --remaining;
      progressed = true;
    }
    if (!progressed) return false;  // a cycle slipped through
  }
  for (int i = 0; i < m; ++i)
    if (std::abs(row[i]) > 1e-10) return false;
  for (int j = 0; j < n; ++j)
    if (std::abs(col[j]) > 1e-10) return false;
  for (double v : out.pi)
    if (v < -1e-12) return false;
  return true;
}

void enumerate_forests(const std::vector<Arc>& arcs, std::size_t from, int max_arcs,
                       std::vector<Arc>& chosen, UnionFind uf, const AtomicMarginal& mu0,
                       const AtomicMarginal& mu1, std::set<std::vector<double>>& seen,
                       std::vector<DiscreteCoupling>& out) {
  DiscreteCoupling c;
  if (solve_on_support(chosen, mu0, mu1, c)) {
    std::vector<double> key = c.pi;
    for (double& v : key) v = std::round(v * 1e10);
    if (seen.insert(std::move(key)).second) out.push_back(c);
  }
  if (static_cast<int>(chosen.size()) == max_arcs) return;
  for (std::size_t k = from; k < arcs.size(); ++k) {
    UnionFind next = uf;
    const int m = static_cast<int>(mu0.mass.size());
    if (!next.unite(arcs[k].i, m + arcs[k].j)) continue;  // keep the set acyclic
    chosen.push_back(arcs[k]);
    enumerate_forests(arcs, k + 1, max_arcs, chosen, next, mu0, mu1, seen, out);
    chosen.pop_back();
  }
}

}  // namespace

std::vector<DiscreteCoupling> enumerate_causal_vertices(const AtomicMarginal& mu0,
                                                        const AtomicMarginal& mu1) {
  const int m = static_cast<int>(mu0.mass.size());
  const int n = static_cast<int>(mu1.mass.size());
  std::vector<Arc> arcs;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (mu0.position[i] <= mu1.position[j]) arcs.push_back({i, j});
    }
  }
  std::vector<Arc> chosen;
  std::set<std::vector<double>> seen;
  std::vector<DiscreteCoupling> out;
  enumerate_forests(arcs, 0, m + n - 1, chosen, UnionFind(m + n), mu0, mu1, seen, out);
  return out;
}

}  // namespace nullot::testsupport
