#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "relipop/popping.hpp"
#include "relipop/scc.hpp"

namespace relipop {

// Witness of the one-cluster repair construction.  repair_map turns a subset
// with exactly one minimal cluster into a root-connected subset by adding one
// "bridge" arc and reversing a set of arcs inside the affected region; the
// witness records enough to undo the surgery exactly.
struct RepairWitness {
  IndexSet s_fix;             // repaired, root-connected subset
  int v = -1;                 // smallest vertex of the minimal cluster
  int bridge_arc = -1;        // added arc, crosses from the stranded side to the root side
  std::vector<int> flipped;   // arcs replaced by their twins, ascending
  std::vector<int> region;    // vertex set the flips are confined to, ascending
};

namespace detail {

// Components reachable from `start_comp` in the condensation DAG; returns a
// vertex flag vector over the union of their members.
inline std::vector<char> reachable_region(const Condensation& cond, int start_comp,
                                          int vertex_count) {
  std::vector<char> comp_seen(cond.count, 0);
  std::vector<int> queue{start_comp};
  comp_seen[start_comp] = 1;
  for (size_t qi = 0; qi < queue.size(); ++qi)
    for (int d : cond.dag[queue[qi]])
      if (!comp_seen[d]) {
        comp_seen[d] = 1;
        queue.push_back(d);
      }
  std::vector<char> region(vertex_count, 0);
  for (int c = 0; c < cond.count; ++c)
    if (comp_seen[c])
      for (int v : cond.members[c]) region[v] = 1;
  return region;
}

}  // namespace detail

// Maps a subset with exactly one minimal cluster to a root-connected subset.
// Requires a bi-directed graph (twin pairing) that is root-connected as a
// whole.  The construction, over R = vertices reaching the root and U = the
// rest: take the first arc (id order) crossing from U to R as the bridge;
// condense (U, S restricted to U); reverse every arc of S that joins two
// different components inside the part of U reachable from the bridge's tail
// component; add the bridge.  The repaired subset satisfies
//   weight(s_fix) = weight(s) * (1 - p_bridge) / p_bridge,
// and distinct (s, v-first-cluster-vertex) pairs stay distinguishable, which
// is what makes the expected-rounds argument work.
inline RepairWitness repair_map(const DirectedMultigraph& g, const IndexSet& s) {
  if (!g.has_twins())
    throw std::invalid_argument("repair_map requires a bi-directed graph (twin pairing)");
  if (!is_root_connected(g))
    throw std::invalid_argument("repair_map requires a root-connected graph");
  MinimalClusterReport report = find_minimal_clusters(g, s);
  if (report.clusters.size() != 1)
    throw std::invalid_argument("repair_map requires exactly one minimal cluster, found " +
                                std::to_string(report.clusters.size()));

  RepairWitness w;
  w.v = report.clusters[0].front();

  std::vector<char> sflags = s.flags();
  std::vector<char> reach = vertices_reaching_root(g, sflags);

  w.bridge_arc = -1;
  for (int a = 0; a < g.arc_count(); ++a) {
    if (!reach[g.arc(a).tail] && reach[g.arc(a).head]) {
      w.bridge_arc = a;
      break;
    }
  }
  if (w.bridge_arc < 0)
    throw std::logic_error("repair_map: no arc crosses into the root side");

  // Condense the stranded side only.
  std::vector<char> stranded(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) stranded[v] = !reach[v];
  Condensation cond = scc_condensation(g, sflags, &stranded);
  std::vector<char> region =
      detail::reachable_region(cond, cond.component[g.arc(w.bridge_arc).tail], g.vertex_count());

  w.s_fix = s;
  s.for_each([&](int a) {
    int ct = cond.component[g.arc(a).tail];
    int ch = cond.component[g.arc(a).head];
    if (region[g.arc(a).tail] && region[g.arc(a).head] && ct != ch) w.flipped.push_back(a);
  });
  for (int a : w.flipped) {
    w.s_fix.erase(a);
    w.s_fix.insert(g.twin(a));
  }
  w.s_fix.insert(w.bridge_arc);

  for (int v = 0; v < g.vertex_count(); ++v)
    if (region[v]) w.region.push_back(v);

  if (!find_minimal_clusters(g, w.s_fix).root_connected())
    throw std::logic_error("repair_map: repaired subset is not root-connected");
  return w;
}

// Undoes repair_map: drop the bridge, recompute the stranded side, and flip
// back the inter-component arcs in the region reachable from v.
inline IndexSet repair_invert(const DirectedMultigraph& g, const RepairWitness& w) {
  if (!g.has_twins())
    throw std::invalid_argument("repair_invert requires a bi-directed graph (twin pairing)");
  if (w.bridge_arc < 0 || w.bridge_arc >= g.arc_count() || w.v < 0 || w.v >= g.vertex_count())
    throw std::invalid_argument("repair_invert: witness indices out of range");
  if (!w.s_fix.contains(w.bridge_arc))
    throw std::invalid_argument("repair_invert: bridge arc missing from the repaired subset");

  IndexSet s = w.s_fix;
  s.erase(w.bridge_arc);
  std::vector<char> sflags = s.flags();
  std::vector<char> reach = vertices_reaching_root(g, sflags);
  if (reach[g.arc(w.bridge_arc).tail] || !reach[g.arc(w.bridge_arc).head] || reach[w.v])
    throw std::invalid_argument(
        "repair_invert: witness is inconsistent with the bridge-removed subset");

  std::vector<char> stranded(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) stranded[v] = !reach[v];
  Condensation cond = scc_condensation(g, sflags, &stranded);
  std::vector<char> region = detail::reachable_region(cond, cond.component[w.v], g.vertex_count());

  std::vector<int> to_flip;
  s.for_each([&](int a) {
    int ct = cond.component[g.arc(a).tail];
    int ch = cond.component[g.arc(a).head];
    if (region[g.arc(a).tail] && region[g.arc(a).head] && ct != ch) to_flip.push_back(a);
  });
  for (int a : to_flip) {
    s.erase(a);
    s.insert(g.twin(a));
  }

  MinimalClusterReport report = find_minimal_clusters(g, s);
  if (report.clusters.size() != 1 || report.clusters[0].front() != w.v)
    throw std::invalid_argument(
        "repair_invert: recovered subset does not have the witnessed minimal cluster");
  return s;
}

}  // namespace relipop
