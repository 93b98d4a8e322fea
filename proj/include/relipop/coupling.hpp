#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "relipop/graph.hpp"
#include "relipop/popping.hpp"

namespace relipop {

// Record of one root-first exploration.  `order` is the sequence in which
// vertices were retired (root first); `image` is the produced arc/edge set;
// `excluded` only applies to the edge->arc direction and lists the arcs that
// are forced absent for the mapping to be invertible.
struct TraversalCertificate {
  IndexSet image;
  IndexSet excluded;
  std::vector<int> order;
};

namespace detail {

// Exploration queue that always retires the smallest active vertex.  The
// deterministic retirement order is what ties the two mapping directions
// together, so both use this one structure.
class ActiveSet {
 public:
  explicit ActiveSet(int n) : in_(n, 0) { heap_.reserve(n); }
  bool empty() const { return heap_.empty(); }
  bool active(int v) const { return in_[v]; }
  void push(int v) {
    if (in_[v]) return;
    in_[v] = 1;
    heap_.push_back(v);
    std::push_heap(heap_.begin(), heap_.end(), std::greater<int>{});
  }
  int pop() {
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<int>{});
    int v = heap_.back();
    heap_.pop_back();
    in_[v] = 0;
    return v;
  }

 private:
  std::vector<char> in_;
  std::vector<int> heap_;
};

}  // namespace detail

// Edge subset -> arc subset.  Explore the component of the root, retiring the
// smallest active vertex first; each subset edge reaching an unexplored
// endpoint maps to the arc oriented from that endpoint toward the retiring
// vertex.  Arc ids follow the pair layout of bidirect(): edge e yields arcs
// 2e (u->v) and 2e+1 (v->u).  The certificate also lists the excluded arcs:
// those outside the image that would have been traversed if present (head
// explored while the tail was still unexplored).  An arc subset s' maps back
// to this edge subset exactly when image(s) is contained in s' and s' avoids
// excluded(s); all remaining arcs are free.
inline TraversalCertificate phi(const UndirectedGraph& g, const IndexSet& s, int root) {
  if (s.universe() != g.edge_count())
    throw std::invalid_argument("edge subset universe does not match the graph");
  if (root < 0 || root >= g.vertex_count()) throw std::invalid_argument("root vertex out of range");
  const int n = g.vertex_count();
  std::vector<std::vector<std::pair<int, int>>> incident(n);  // (edge id, other endpoint)
  for (int e = 0; e < g.edge_count(); ++e) {
    incident[g.edge(e).u].push_back({e, g.edge(e).v});
    incident[g.edge(e).v].push_back({e, g.edge(e).u});
  }

  TraversalCertificate cert;
  cert.image = IndexSet(2 * g.edge_count());
  cert.excluded = IndexSet(2 * g.edge_count());
  std::vector<char> explored(n, 0);
  detail::ActiveSet active(n);
  active.push(root);
  while (!active.empty()) {
    int v = active.pop();
    explored[v] = 1;
    cert.order.push_back(v);
    for (auto [e, w] : incident[v]) {
      if (!s.contains(e) || explored[w]) continue;
      // arc oriented w -> v: 2e if w is the edge's u endpoint, else 2e+1
      cert.image.insert(g.edge(e).u == w ? 2 * e : 2 * e + 1);
      active.push(w);
    }
  }

  std::vector<int> pos(n, -1);
  for (size_t i = 0; i < cert.order.size(); ++i) pos[cert.order[i]] = static_cast<int>(i);
  for (int a = 0; a < 2 * g.edge_count(); ++a) {
    if (cert.image.contains(a)) continue;
    int e = a >> 1;
    int tail = (a & 1) ? g.edge(e).v : g.edge(e).u;
    int head = (a & 1) ? g.edge(e).u : g.edge(e).v;
    // Present, this arc would have been traversed at the head's retirement
    // (its tail was still unexplored then), changing the image.
    if (explored[head] && (!explored[tail] || pos[head] < pos[tail])) cert.excluded.insert(a);
  }
  return cert;
}

// Arc subset -> edge subset, the inverse direction: explore following subset
// arcs backwards (an in-arc from an unexplored tail admits the tail and maps
// the arc to its underlying edge).  Requires the bidirect() pair layout.
inline TraversalCertificate psi(const DirectedMultigraph& g, const IndexSet& s, int root) {
  if (s.universe() != g.arc_count())
    throw std::invalid_argument("arc subset universe does not match the graph");
  if (root < 0 || root >= g.vertex_count()) throw std::invalid_argument("root vertex out of range");
  if (!g.has_twins() || g.arc_count() % 2 != 0)
    throw std::invalid_argument("psi requires the bi-directed pair layout");
  for (int a = 0; a < g.arc_count(); ++a)
    if (g.twin(a) != (a ^ 1))
      throw std::invalid_argument("psi requires twin arcs at ids 2e and 2e+1");

  const int n = g.vertex_count();
  std::vector<std::vector<std::pair<int, int>>> in_arcs(n);  // (arc id, tail)
  for (int a = 0; a < g.arc_count(); ++a) in_arcs[g.arc(a).head].push_back({a, g.arc(a).tail});

  TraversalCertificate cert;
  cert.image = IndexSet(g.arc_count() / 2);
  cert.excluded = IndexSet(0);
  std::vector<char> explored(n, 0);
  detail::ActiveSet active(n);
  active.push(root);
  while (!active.empty()) {
    int v = active.pop();
    explored[v] = 1;
    cert.order.push_back(v);
    for (auto [a, t] : in_arcs[v]) {
      if (!s.contains(a) || explored[t]) continue;
      cert.image.insert(a >> 1);
      active.push(t);
    }
  }
  return cert;
}

// Lean repeat-use version of psi that only reports the image size; the
// weighted-size estimator drives this millions of times per level.
class PsiSizeScratch {
 public:
  explicit PsiSizeScratch(const DirectedMultigraph& g) : g_(&g) {
    if (!g.has_twins()) throw std::invalid_argument("psi requires the bi-directed pair layout");
    const int n = g.vertex_count();
    offset_.assign(n + 1, 0);
    for (const Arc& a : g.arcs()) offset_[a.head + 1]++;
    for (int v = 0; v < n; ++v) offset_[v + 1] += offset_[v];
    in_arc_.resize(g.arc_count());
    in_tail_.resize(g.arc_count());
    std::vector<int> cursor(offset_.begin(), offset_.end() - 1);
    for (int a = 0; a < g.arc_count(); ++a) {
      int slot = cursor[g.arc(a).head]++;
      in_arc_[slot] = a;
      in_tail_[slot] = g.arc(a).tail;
    }
    explored_.resize(n);
    in_active_.resize(n);
    heap_.reserve(n);
  }

  int image_size(const std::vector<char>& present, int root) {
    std::fill(explored_.begin(), explored_.end(), 0);
    std::fill(in_active_.begin(), in_active_.end(), 0);
    heap_.clear();
    heap_.push_back(root);
    in_active_[root] = 1;
    int edges = 0;
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<int>{});
      int v = heap_.back();
      heap_.pop_back();
      explored_[v] = 1;
      for (int slot = offset_[v]; slot < offset_[v + 1]; ++slot) {
        int a = in_arc_[slot];
        int t = in_tail_[slot];
        if (!present[a] || explored_[t]) continue;
        ++edges;
        if (!in_active_[t]) {
          in_active_[t] = 1;
          heap_.push_back(t);
          std::push_heap(heap_.begin(), heap_.end(), std::greater<int>{});
        }
      }
    }
    return edges;
  }

 private:
  const DirectedMultigraph* g_;
  std::vector<int> offset_, in_arc_, in_tail_;
  std::vector<char> explored_, in_active_;
  std::vector<int> heap_;
};

// Exact sampler for edge subsets distributed as the failure measure
// conditioned on connectedness: pop a root-connected arc subset of the
// bi-directed version, then project it through psi.
inline SampleResult sample_connected(const UndirectedGraph& g, int root, std::uint64_t seed,
                                     std::uint64_t stream = 0) {
  if (root < 0 || root >= g.vertex_count()) throw std::invalid_argument("root vertex out of range");
  if (!is_connected(g))
    throw std::invalid_argument("graph is not connected: no edge subset spans it");
  DirectedMultigraph d = bidirect(g, root);
  SampleResult arcs = cluster_popping_sample(d, seed, stream);
  SampleResult out;
  out.subset = psi(d, arcs.subset, root).image;
  out.stats = arcs.stats;
  return out;
}

}  // namespace relipop
