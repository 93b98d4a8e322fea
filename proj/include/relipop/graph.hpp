#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relipop/util.hpp"

namespace relipop {

struct Arc {
  int tail = -1;
  int head = -1;
  double fail_prob = 0.0;
};

struct Edge {
  int u = -1;
  int v = -1;
  double fail_prob = 0.0;
};

// Subset of arc/edge ids over a fixed universe [0, universe).  Bitset-backed;
// iteration is always in ascending id order.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(int universe)
      : universe_(universe), words_((universe + 63) / 64, 0) {}

  int universe() const { return universe_; }
  int size() const {
    int total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
  }
  bool empty() const {
    for (std::uint64_t w : words_)
      if (w) return false;
    return true;
  }

  bool contains(int id) const {
    check(id);
    return (words_[id >> 6] >> (id & 63)) & 1;
  }
  void insert(int id) {
    check(id);
    words_[id >> 6] |= std::uint64_t{1} << (id & 63);
  }
  void erase(int id) {
    check(id);
    words_[id >> 6] &= ~(std::uint64_t{1} << (id & 63));
  }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }

  template <typename F>
  void for_each(F&& f) const {
    for (size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w) {
        int bit = std::countr_zero(w);
        f(static_cast<int>(wi * 64 + bit));
        w &= w - 1;
      }
    }
  }

  std::vector<int> sorted_ids() const {
    std::vector<int> ids;
    ids.reserve(size());
    for_each([&](int id) { ids.push_back(id); });
    return ids;
  }

  std::vector<char> flags() const {
    std::vector<char> out(universe_, 0);
    for_each([&](int id) { out[id] = 1; });
    return out;
  }

  // Packs the set into a bitmask; only valid for universes up to 32 ids.
  std::uint32_t mask() const {
    if (universe_ > 32) throw std::logic_error("IndexSet::mask: universe exceeds 32 ids");
    return words_.empty() ? 0u : static_cast<std::uint32_t>(words_[0]);
  }

  static IndexSet from_mask(std::uint64_t mask, int universe) {
    IndexSet s(universe);
    if (universe < 64 && (mask >> universe) != 0)
      throw std::invalid_argument("IndexSet::from_mask: mask has bits outside universe");
    if (!s.words_.empty()) s.words_[0] = mask;
    return s;
  }

  static IndexSet from_flags(const std::vector<char>& present) {
    IndexSet s(static_cast<int>(present.size()));
    for (size_t i = 0; i < present.size(); ++i)
      if (present[i]) s.insert(static_cast<int>(i));
    return s;
  }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.universe_ == b.universe_ && a.words_ == b.words_;
  }

 private:
  void check(int id) const {
    if (id < 0 || id >= universe_)
      throw std::out_of_range("IndexSet: id " + std::to_string(id) + " outside universe of " +
                              std::to_string(universe_));
  }
  int universe_ = 0;
  std::vector<std::uint64_t> words_;
};

namespace detail {
inline void check_prob(double p, const char* what) {
  if (!(p >= 0.0) || !(p <= 1.0) || std::isnan(p))
    throw std::invalid_argument(std::string(what) + " failure probability must lie in [0, 1]");
}
}  // namespace detail

// Directed multigraph with a distinguished root and independent per-arc
// failure probabilities.  Arc ids are stable; an optional twin pairing marks
// bi-directed structure (twin(a) reverses a; p matches within a pair).
class DirectedMultigraph {
 public:
  DirectedMultigraph(int vertex_count, int root, std::vector<Arc> arcs,
                     std::vector<int> twin = {})
      : n_(vertex_count), root_(root), arcs_(std::move(arcs)), twin_(std::move(twin)) {
    if (n_ <= 0) throw std::invalid_argument("graph needs at least one vertex");
    if (root_ < 0 || root_ >= n_) throw std::invalid_argument("root vertex out of range");
    for (const Arc& a : arcs_) {
      if (a.tail < 0 || a.tail >= n_ || a.head < 0 || a.head >= n_)
        throw std::invalid_argument("arc endpoint out of range");
      if (a.tail == a.head) throw std::invalid_argument("self-loop arcs are not allowed");
      detail::check_prob(a.fail_prob, "arc");
    }
    if (!twin_.empty()) {
      if (twin_.size() != arcs_.size())
        throw std::invalid_argument("twin map must cover every arc");
      for (int a = 0; a < arc_count(); ++a) {
        int b = twin_[a];
        if (b < 0 || b >= arc_count() || b == a || twin_[b] != a)
          throw std::invalid_argument("twin map is not an involution");
        if (arcs_[a].tail != arcs_[b].head || arcs_[a].head != arcs_[b].tail)
          throw std::invalid_argument("twin arcs must reverse each other");
        if (arcs_[a].fail_prob != arcs_[b].fail_prob)
          throw std::invalid_argument("twin arcs must share a failure probability");
      }
    }
  }

  int vertex_count() const { return n_; }
  int root() const { return root_; }
  int arc_count() const { return static_cast<int>(arcs_.size()); }
  const Arc& arc(int id) const { return arcs_[id]; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  bool has_twins() const { return !twin_.empty(); }
  int twin(int id) const {
    if (twin_.empty()) throw std::logic_error("graph carries no twin pairing");
    return twin_[id];
  }
  const std::vector<int>& twin_map() const { return twin_; }

  double max_fail_prob() const {
    double p = 0.0;
    for (const Arc& a : arcs_) p = std::max(p, a.fail_prob);
    return p;
  }

  // True when every arc shares one failure probability (reported via p_out).
  bool uniform_fail_prob(double* p_out = nullptr) const {
    if (arcs_.empty()) return false;
    double p = arcs_[0].fail_prob;
    for (const Arc& a : arcs_)
      if (a.fail_prob != p) return false;
    if (p_out) *p_out = p;
    return true;
  }

 private:
  int n_;
  int root_;
  std::vector<Arc> arcs_;
  std::vector<int> twin_;
};

class UndirectedGraph {
 public:
  UndirectedGraph(int vertex_count, std::vector<Edge> edges)
      : n_(vertex_count), edges_(std::move(edges)) {
    if (n_ <= 0) throw std::invalid_argument("graph needs at least one vertex");
    for (const Edge& e : edges_) {
      if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
        throw std::invalid_argument("edge endpoint out of range");
      if (e.u == e.v) throw std::invalid_argument("self-loop edges are not allowed");
      detail::check_prob(e.fail_prob, "edge");
    }
  }

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int id) const { return edges_[id]; }
  const std::vector<Edge>& edges() const { return edges_; }

  double max_fail_prob() const {
    double p = 0.0;
    for (const Edge& e : edges_) p = std::max(p, e.fail_prob);
    return p;
  }

  bool uniform_fail_prob(double* p_out = nullptr) const {
    if (edges_.empty()) return false;
    double p = edges_[0].fail_prob;
    for (const Edge& e : edges_)
      if (e.fail_prob != p) return false;
    if (p_out) *p_out = p;
    return true;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
};

// Replaces edge i with the arc pair 2i (u->v) and 2i+1 (v->u), both keeping
// the edge's failure probability.  This fixed layout is what the coupling
// (psi/phi) relies on to map arc ids back to edge ids.
inline DirectedMultigraph bidirect(const UndirectedGraph& g, int root) {
  std::vector<Arc> arcs;
  arcs.reserve(2 * g.edge_count());
  std::vector<int> twin(2 * g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    arcs.push_back({ed.u, ed.v, ed.fail_prob});
    arcs.push_back({ed.v, ed.u, ed.fail_prob});
    twin[2 * e] = 2 * e + 1;
    twin[2 * e + 1] = 2 * e;
  }
  return DirectedMultigraph(g.vertex_count(), root, std::move(arcs), std::move(twin));
}

// Tries to match every arc with a reversed partner of equal probability.
// Returns the pairing if the whole arc set splits into such pairs.  Parallel
// arcs with equal probabilities are paired greedily in id order.
inline std::optional<std::vector<int>> find_twin_pairing(const std::vector<Arc>& arcs) {
  std::map<std::tuple<int, int, double>, std::vector<int>> buckets;
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a)
    buckets[{arcs[a].tail, arcs[a].head, arcs[a].fail_prob}].push_back(a);
  std::vector<int> twin(arcs.size(), -1);
  for (auto& [key, ids] : buckets) {
    auto [tail, head, p] = key;
    if (tail > head) continue;  // handled from the (smaller, larger) side
    auto rev = buckets.find({head, tail, p});
    if (rev == buckets.end() || rev->second.size() != ids.size()) return std::nullopt;
    for (size_t i = 0; i < ids.size(); ++i) {
      twin[ids[i]] = rev->second[i];
      twin[rev->second[i]] = ids[i];
    }
  }
  for (int t : twin)
    if (t < 0) return std::nullopt;
  return twin;
}

struct ContractPairResult {
  DirectedMultigraph graph;
  std::vector<int> removed_arcs;  // ids in the input graph joining u and v
  std::vector<int> arc_map;       // input arc id -> new id, -1 for removed
};

// Merges adjacent vertices u and v into one.  The merged vertex keeps the
// root's identity if either endpoint is the root, otherwise min(u, v); all
// ids above the dropped label shift down by one so labels stay dense.  Arcs
// between u and v disappear; everything else is relabelled in id order.
inline ContractPairResult contract_pair(const DirectedMultigraph& g, int u, int v) {
  int n = g.vertex_count();
  if (u < 0 || u >= n || v < 0 || v >= n) throw std::invalid_argument("contract_pair: vertex out of range");
  if (u == v) throw std::invalid_argument("contract_pair: vertices must differ");
  bool adjacent = false;
  for (const Arc& a : g.arcs()) {
    if ((a.tail == u && a.head == v) || (a.tail == v && a.head == u)) {
      adjacent = true;
      break;
    }
  }
  if (!adjacent) throw std::invalid_argument("contract_pair: vertices are not adjacent");

  int keep = (g.root() == u || g.root() == v) ? g.root() : std::min(u, v);
  int drop = (keep == u) ? v : u;
  auto relabel = [&](int x) {
    int y = (x == drop) ? keep : x;
    return y > drop ? y - 1 : y;
  };

  std::vector<Arc> arcs;
  std::vector<int> arc_map(g.arc_count(), -1);
  std::vector<int> removed;
  for (int a = 0; a < g.arc_count(); ++a) {
    const Arc& arc = g.arc(a);
    bool joins = (arc.tail == u && arc.head == v) || (arc.tail == v && arc.head == u);
    if (joins) {
      removed.push_back(a);
      continue;
    }
    arc_map[a] = static_cast<int>(arcs.size());
    arcs.push_back({relabel(arc.tail), relabel(arc.head), arc.fail_prob});
  }

  std::vector<int> twin;
  if (g.has_twins()) {
    twin.assign(arcs.size(), -1);
    for (int a = 0; a < g.arc_count(); ++a) {
      if (arc_map[a] < 0) continue;
      int b = g.twin(a);
      if (arc_map[b] < 0)
        throw std::logic_error("contract_pair: twin of a surviving arc was removed");
      twin[arc_map[a]] = arc_map[b];
    }
  }

  DirectedMultigraph out(n - 1, relabel(g.root()), std::move(arcs), std::move(twin));
  return {std::move(out), std::move(removed), std::move(arc_map)};
}

// Scratch for repeated "does every vertex reach the root" checks against a
// fixed arc structure with varying presence flags.
class ReachChecker {
 public:
  explicit ReachChecker(const DirectedMultigraph& g) : g_(&g) {
    int n = g.vertex_count();
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
    seen_.assign(n, 0);
    queue_.reserve(n);
  }

  // Fills reach[v] = 1 iff v reaches the root through present arcs.
  void reaching_root(const std::vector<char>& present, std::vector<char>& reach) {
    int n = g_->vertex_count();
    reach.assign(n, 0);
    queue_.clear();
    queue_.push_back(g_->root());
    reach[g_->root()] = 1;
    for (size_t qi = 0; qi < queue_.size(); ++qi) {
      int v = queue_[qi];
      for (int s = offset_[v]; s < offset_[v + 1]; ++s) {
        if (!present[in_arc_[s]]) continue;
        int t = in_tail_[s];
        if (!reach[t]) {
          reach[t] = 1;
          queue_.push_back(t);
        }
      }
    }
  }

  bool root_connected(const std::vector<char>& present) {
    reaching_root(present, seen_);
    for (char c : seen_)
      if (!c) return false;
    return true;
  }

 private:
  const DirectedMultigraph* g_;
  std::vector<int> offset_, in_arc_, in_tail_;
  std::vector<char> seen_;
  std::vector<int> queue_;
};

inline std::vector<char> vertices_reaching_root(const DirectedMultigraph& g,
                                                const std::vector<char>& present) {
  ReachChecker checker(g);
  std::vector<char> reach;
  checker.reaching_root(present, reach);
  return reach;
}

inline std::vector<char> vertices_reaching_root(const DirectedMultigraph& g, const IndexSet& s) {
  if (s.universe() != g.arc_count())
    throw std::invalid_argument("arc subset universe does not match the graph");
  return vertices_reaching_root(g, s.flags());
}

inline std::vector<char> vertices_reaching_root(const DirectedMultigraph& g) {
  return vertices_reaching_root(g, std::vector<char>(g.arc_count(), 1));
}

inline bool is_root_connected(const DirectedMultigraph& g, const IndexSet& s) {
  auto reach = vertices_reaching_root(g, s);
  return std::find(reach.begin(), reach.end(), 0) == reach.end();
}

inline bool is_root_connected(const DirectedMultigraph& g) {
  auto reach = vertices_reaching_root(g);
  return std::find(reach.begin(), reach.end(), 0) == reach.end();
}

inline bool is_connected(const UndirectedGraph& g, const std::vector<char>& present) {
  int n = g.vertex_count();
  std::vector<std::vector<int>> adj(n);
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!present[e]) continue;
    adj[g.edge(e).u].push_back(g.edge(e).v);
    adj[g.edge(e).v].push_back(g.edge(e).u);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  for (size_t qi = 0; qi < queue.size(); ++qi)
    for (int w : adj[queue[qi]])
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
  return std::find(seen.begin(), seen.end(), 0) == seen.end();
}

inline bool is_connected(const UndirectedGraph& g, const IndexSet& s) {
  if (s.universe() != g.edge_count())
    throw std::invalid_argument("edge subset universe does not match the graph");
  return is_connected(g, s.flags());
}

inline bool is_connected(const UndirectedGraph& g) {
  return is_connected(g, std::vector<char>(g.edge_count(), 1));
}

// log of the product-measure weight of the subset: present arcs contribute
// log(1-p), absent ones log(p).  Boundary probabilities give -inf naturally.
inline double subgraph_log_weight(const DirectedMultigraph& g, const IndexSet& s) {
  if (s.universe() != g.arc_count())
    throw std::invalid_argument("arc subset universe does not match the graph");
  double sum = 0.0;
  for (int a = 0; a < g.arc_count(); ++a) {
    double p = g.arc(a).fail_prob;
    sum += s.contains(a) ? std::log1p(-p) : std::log(p);
  }
  return sum;
}

inline double subgraph_log_weight(const UndirectedGraph& g, const IndexSet& s) {
  if (s.universe() != g.edge_count())
    throw std::invalid_argument("edge subset universe does not match the graph");
  double sum = 0.0;
  for (int e = 0; e < g.edge_count(); ++e) {
    double p = g.edge(e).fail_prob;
    sum += s.contains(e) ? std::log1p(-p) : std::log(p);
  }
  return sum;
}

}  // namespace relipop
