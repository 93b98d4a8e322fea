#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relipop/graph.hpp"
#include "relipop/rng.hpp"
#include "relipop/scc.hpp"

namespace relipop {

struct PoppingStats {
  std::uint64_t popped_clusters = 0;  // minimal clusters resampled
  std::uint64_t rounds = 0;           // resampling sweeps (>= 1 cluster each)
  std::uint64_t arcs_rerandomized = 0;

  void merge(const PoppingStats& o) {
    popped_clusters += o.popped_clusters;
    rounds += o.rounds;
    arcs_rerandomized += o.arcs_rerandomized;
  }
};

// Minimal clusters of (V, S): vertex sets that reach nothing outside
// themselves through S and do not contain the root.  Equivalently the sink
// components of the condensation, root's component excluded.  S is
// root-connected exactly when there are none.
struct MinimalClusterReport {
  std::vector<std::vector<int>> clusters;  // ascending members, ordered by first vertex
  IndexSet resample_arcs;                  // every arc whose tail lies in some cluster

  bool root_connected() const { return clusters.empty(); }
};

inline MinimalClusterReport find_minimal_clusters(const DirectedMultigraph& g,
                                                  const IndexSet& s) {
  if (s.universe() != g.arc_count())
    throw std::invalid_argument("arc subset universe does not match the graph");
  Condensation cond = scc_condensation(g, s);
  MinimalClusterReport report;
  report.resample_arcs = IndexSet(g.arc_count());
  int root_comp = cond.component[g.root()];
  std::vector<char> in_cluster(g.vertex_count(), 0);
  for (int c = 0; c < cond.count; ++c) {
    if (c == root_comp || !cond.is_sink(c)) continue;
    for (int v : cond.members[c]) in_cluster[v] = 1;
    report.clusters.push_back(cond.members[c]);
  }
  std::sort(report.clusters.begin(), report.clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (int a = 0; a < g.arc_count(); ++a)
    if (in_cluster[g.arc(a).tail]) report.resample_arcs.insert(a);
  return report;
}

class RoundCapExceeded : public std::runtime_error {
 public:
  explicit RoundCapExceeded(std::uint64_t cap)
      : std::runtime_error("cluster popping exceeded the round cap of " + std::to_string(cap)),
        cap(cap) {}
  std::uint64_t cap;
};

struct SampleOptions {
  // Cap on resampling rounds per sample.  Unset means: no cap for bi-directed
  // graphs (expected rounds are provably polynomial there), 10^6 for general
  // digraphs, where the loop may not terminate in reasonable time.
  std::optional<std::uint64_t> round_cap{};
};

inline constexpr std::uint64_t kDefaultDigraphRoundCap = 1000000;

// Draws arc subsets distributed as the failure measure conditioned on being
// root-connected.  Each round finds the minimal clusters of the current
// subset and re-randomizes every arc leaving their union (present or not),
// until no cluster remains.  One instance holds all scratch buffers, so a
// tight sampling loop performs no allocation after warm-up.
class ClusterPopper {
 public:
  explicit ClusterPopper(const DirectedMultigraph& g, SampleOptions opts = {}) : g_(&g) {
    const int m = g.arc_count();
    one_minus_p_.resize(m);
    std::vector<char> can_be_present(m);
    for (int a = 0; a < m; ++a) {
      one_minus_p_[a] = 1.0 - g.arc(a).fail_prob;
      can_be_present[a] = g.arc(a).fail_prob < 1.0;
    }
    // Arcs that fail surely can never help; root-connectivity must hold without them.
    if (!is_root_connected(g, IndexSet::from_flags(can_be_present)))
      throw std::invalid_argument(
          "graph is not root-connected: no arc subset with positive weight reaches the root "
          "from every vertex");
    cap_ = opts.round_cap ? opts.round_cap
                          : (g.has_twins() ? std::optional<std::uint64_t>{}
                                           : std::optional<std::uint64_t>{kDefaultDigraphRoundCap});
    cluster_vertex_.resize(g.vertex_count());
  }

  const DirectedMultigraph& graph() const { return *g_; }
  std::optional<std::uint64_t> round_cap() const { return cap_; }

  // Fills `present` with the sampled subset and accumulates stats.
  void sample(Rng& rng, std::vector<char>& present, PoppingStats& stats) {
    const DirectedMultigraph& g = *g_;
    const int m = g.arc_count();
    const int n = g.vertex_count();
    present.assign(m, 0);
    for (int a = 0; a < m; ++a) present[a] = rng.u01() < one_minus_p_[a];
    std::uint64_t local_rounds = 0;
    for (;;) {
      scc_.compute(g, present);
      cluster_comp_.assign(scc_.comp_count, 1);
      cluster_comp_[scc_.comp[g.root()]] = 0;
      for (int a = 0; a < m; ++a) {
        if (!present[a]) continue;
        int ct = scc_.comp[g.arc(a).tail];
        if (ct != scc_.comp[g.arc(a).head]) cluster_comp_[ct] = 0;
      }
      int popped = 0;
      for (char c : cluster_comp_) popped += c;
      if (popped == 0) break;
      if (cap_ && ++local_rounds > *cap_) throw RoundCapExceeded(*cap_);
      stats.rounds += 1;
      stats.popped_clusters += popped;
      for (int v = 0; v < n; ++v) cluster_vertex_[v] = cluster_comp_[scc_.comp[v]];
      for (int a = 0; a < m; ++a) {
        if (!cluster_vertex_[g.arc(a).tail]) continue;
        present[a] = rng.u01() < one_minus_p_[a];
        stats.arcs_rerandomized += 1;
      }
    }
  }

  IndexSet sample_set(Rng& rng, PoppingStats& stats) {
    sample(rng, scratch_present_, stats);
    return IndexSet::from_flags(scratch_present_);
  }

 private:
  const DirectedMultigraph* g_;
  std::optional<std::uint64_t> cap_;
  std::vector<double> one_minus_p_;
  SccScratch scc_;
  std::vector<char> cluster_comp_;
  std::vector<char> cluster_vertex_;
  std::vector<char> scratch_present_;
};

struct SampleResult {
  IndexSet subset;
  PoppingStats stats;
};

inline SampleResult cluster_popping_sample(const DirectedMultigraph& g, std::uint64_t seed,
                                           std::uint64_t stream = 0, SampleOptions opts = {}) {
  ClusterPopper popper(g, opts);
  Rng rng(seed, stream);
  SampleResult result;
  result.subset = popper.sample_set(rng, result.stats);
  return result;
}

}  // namespace relipop
