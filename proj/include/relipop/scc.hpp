#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "relipop/graph.hpp"

namespace relipop {

// Reusable Tarjan workspace.  compute() finds strongly connected components
// of the subgraph given by per-arc presence flags, optionally restricted to a
// vertex subset.  Component ids come out in reverse topological order (sinks
// first); excluded vertices get component -1.  Buffers persist across calls
// so the popping loop never allocates.
class SccScratch {
 public:
  void compute(const DirectedMultigraph& g, const std::vector<char>& arc_present,
               const std::vector<char>* vertex_in = nullptr) {
    const int n = g.vertex_count();
    offset_.assign(n + 1, 0);
    for (int a = 0; a < g.arc_count(); ++a) {
      if (!use_arc(g, a, arc_present, vertex_in)) continue;
      offset_[g.arc(a).tail + 1]++;
    }
    for (int v = 0; v < n; ++v) offset_[v + 1] += offset_[v];
    nbr_.resize(offset_[n]);
    cursor_.assign(offset_.begin(), offset_.end() - 1);
    for (int a = 0; a < g.arc_count(); ++a) {
      if (!use_arc(g, a, arc_present, vertex_in)) continue;
      nbr_[cursor_[g.arc(a).tail]++] = g.arc(a).head;
    }

    comp.assign(n, -1);
    comp_count = 0;
    index_.assign(n, -1);
    low_.assign(n, 0);
    on_stack_.assign(n, 0);
    stack_.clear();
    frames_.clear();
    int next_index = 0;

    for (int v0 = 0; v0 < n; ++v0) {
      if (index_[v0] != -1) continue;
      if (vertex_in && !(*vertex_in)[v0]) continue;
      index_[v0] = low_[v0] = next_index++;
      stack_.push_back(v0);
      on_stack_[v0] = 1;
      frames_.push_back({v0, offset_[v0]});
      while (!frames_.empty()) {
        int v = frames_.back().first;
        int& cur = frames_.back().second;
        if (cur < offset_[v + 1]) {
          int w = nbr_[cur++];
          if (index_[w] == -1) {
            index_[w] = low_[w] = next_index++;
            stack_.push_back(w);
            on_stack_[w] = 1;
            frames_.push_back({w, offset_[w]});
          } else if (on_stack_[w]) {
            low_[v] = std::min(low_[v], index_[w]);
          }
        } else {
          frames_.pop_back();
          if (!frames_.empty()) {
            int parent = frames_.back().first;
            low_[parent] = std::min(low_[parent], low_[v]);
          }
          if (low_[v] == index_[v]) {
            int u;
            do {
              u = stack_.back();
              stack_.pop_back();
              on_stack_[u] = 0;
              comp[u] = comp_count;
            } while (u != v);
            comp_count++;
          }
        }
      }
    }
  }

  std::vector<int> comp;  // vertex -> component id (reverse topological), -1 if excluded
  int comp_count = 0;

 private:
  static bool use_arc(const DirectedMultigraph& g, int a, const std::vector<char>& present,
                      const std::vector<char>* vertex_in) {
    if (!present[a]) return false;
    if (!vertex_in) return true;
    return (*vertex_in)[g.arc(a).tail] && (*vertex_in)[g.arc(a).head];
  }

  std::vector<int> offset_, nbr_, cursor_, index_, low_, stack_;
  std::vector<char> on_stack_;
  std::vector<std::pair<int, int>> frames_;
};

// Condensation in topological order: every DAG arc goes from a lower to a
// higher component id, members lists are ascending, adjacency deduplicated.
struct Condensation {
  std::vector<int> component;  // vertex -> component id, -1 for excluded vertices
  int count = 0;
  std::vector<std::vector<int>> dag;
  std::vector<std::vector<int>> members;

  bool is_sink(int c) const { return dag[c].empty(); }
};

inline Condensation scc_condensation(const DirectedMultigraph& g,
                                     const std::vector<char>& arc_present,
                                     const std::vector<char>* vertex_in = nullptr) {
  SccScratch scratch;
  scratch.compute(g, arc_present, vertex_in);
  Condensation out;
  out.count = scratch.comp_count;
  out.component.assign(g.vertex_count(), -1);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (scratch.comp[v] >= 0) out.component[v] = out.count - 1 - scratch.comp[v];
  out.members.assign(out.count, {});
  for (int v = 0; v < g.vertex_count(); ++v)
    if (out.component[v] >= 0) out.members[out.component[v]].push_back(v);

  std::vector<std::pair<int, int>> arcs;
  for (int a = 0; a < g.arc_count(); ++a) {
    if (!arc_present[a]) continue;
    int ct = out.component[g.arc(a).tail];
    int ch = out.component[g.arc(a).head];
    if (ct < 0 || ch < 0 || ct == ch) continue;
    arcs.emplace_back(ct, ch);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  out.dag.assign(out.count, {});
  for (auto [c, d] : arcs) out.dag[c].push_back(d);
  return out;
}

inline Condensation scc_condensation(const DirectedMultigraph& g, const IndexSet& s) {
  if (s.universe() != g.arc_count())
    throw std::invalid_argument("arc subset universe does not match the graph");
  return scc_condensation(g, s.flags());
}

}  // namespace relipop
