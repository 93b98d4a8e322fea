#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relipop/coupling.hpp"
#include "relipop/graph.hpp"
#include "relipop/matrix_tree.hpp"
#include "relipop/oracle.hpp"
#include "relipop/reliability.hpp"
#include "relipop/util.hpp"

namespace relipop {

// Edges whose removal disconnects the graph; these are exactly the edges that
// belong to every spanning connected subgraph, so the count of connected
// subgraphs with one edge missing is (edge count) - (bridge count).
inline int count_bridges(const UndirectedGraph& g) {
  const int n = g.vertex_count();
  const int m = g.edge_count();
  std::vector<std::vector<std::pair<int, int>>> incident(n);  // (edge, other endpoint)
  for (int e = 0; e < m; ++e) {
    incident[g.edge(e).u].push_back({e, g.edge(e).v});
    incident[g.edge(e).v].push_back({e, g.edge(e).u});
  }
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<std::pair<int, size_t>> frames;  // (vertex, incident cursor)
  std::vector<int> via_edge(n, -1);            // edge used to enter the vertex
  int bridges = 0;
  int timer = 0;
  for (int v0 = 0; v0 < n; ++v0) {
    if (disc[v0] != -1) continue;
    disc[v0] = low[v0] = timer++;
    frames.push_back({v0, 0});
    while (!frames.empty()) {
      auto& [v, cursor] = frames.back();
      if (cursor < incident[v].size()) {
        auto [e, w] = incident[v][cursor++];
        if (e == via_edge[v]) continue;  // don't step back through the entering edge
        if (disc[w] == -1) {
          disc[w] = low[w] = timer++;
          via_edge[w] = e;
          frames.push_back({w, 0});
        } else {
          low[v] = std::min(low[v], disc[w]);
        }
      } else {
        frames.pop_back();
        if (!frames.empty()) {
          int parent = frames.back().first;
          low[parent] = std::min(low[parent], low[v]);
          if (low[v] > disc[parent]) ++bridges;
        }
      }
    }
  }
  return bridges;
}

// Verifies N_{t-1} N_{t+1} <= N_t^2 across the whole size range by exhaustive
// enumeration (small instances only).
inline bool check_log_concavity(const UndirectedGraph& g) {
  EnumerationResult res = enumerate_rel(g, false);
  auto count = [&](int t) -> std::uint64_t {
    auto it = res.counts_by_size.find(t);
    return it == res.counts_by_size.end() ? 0 : it->second;
  };
  const int n = g.vertex_count();
  const int m = g.edge_count();
  for (int t = n; t <= m - 1; ++t) {
    // counts fit in 64 bits comfortably: at most 2^24 subsets in total
    std::uint64_t lhs = count(t - 1) * count(t + 1);
    std::uint64_t rhs = count(t) * count(t);
    if (lhs > rhs) return false;
  }
  return true;
}

// Default per-level budget ceil(50 m^3 (m-t)^2 eps^-2); callers may override
// with something smaller when the instance's ratio variance allows it.
inline std::uint64_t ladder_sample_count(int m, int t, double eps) {
  double md = m;
  return ceil_to_u64(50.0 * md * md * md * (md - t) * (md - t) / (eps * eps));
}

// One draw from the size-tilted connected-subgraph measure: every edge fails
// with probability 1/(1+r), so a connected subgraph of size k has weight
// proportional to r^k.
inline IndexSet sample_at_weight(const UndirectedGraph& g, double r, std::uint64_t seed,
                                 std::uint64_t stream = 0, PoppingStats* stats = nullptr) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("size weight must be positive and finite");
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) e.fail_prob = 1.0 / (1.0 + r);
  UndirectedGraph tilted(g.vertex_count(), std::move(edges));
  SampleResult res = sample_connected(tilted, 0, seed, stream);
  if (stats) stats->merge(res.stats);
  return res.subset;
}

struct LadderLevel {
  int level = 0;                  // the size whose count this level extends to
  std::uint64_t hits_low = 0;     // draws of size `level`
  std::uint64_t hits_high = 0;    // draws of size `level + 1`
  std::uint64_t samples = 0;
  double ratio = 0.0;             // running N_level / N_{level+1} estimate
};

struct LadderFailureInfo {
  int level = -1;
  double ratio = 0.0;
  std::string reason;
};

class LadderFailure : public std::runtime_error {
 public:
  LadderFailure(const std::string& msg, LadderFailureInfo info)
      : std::runtime_error(msg), info(std::move(info)) {}
  LadderFailureInfo info;
};

struct FixedSizeOptions {
  std::uint64_t samples_per_level = 0;  // 0: use ladder_sample_count
  unsigned threads = 1;
};

struct FixedSizeResult {
  EstimateReport report;           // estimate/log_estimate of the count
  bool exact = false;              // true when a closed-form path was taken
  std::vector<LadderLevel> levels; // the median run's ladder, top size down
};

namespace detail {

struct LadderRunOutcome {
  std::optional<double> log_count;
  std::vector<LadderLevel> levels;
  LadderFailureInfo failure;
};

// One descent of the ratio ladder from size m-1 down to t.  Starts from the
// exact values N_m = 1 and N_{m-1} = m - bridges and pulls each next level in
// by the empirical ratio of adjacent size counts under the tilted measure.
// At level i the measure is tilted by r ~ N_i/N_{i+1}; the draw-size counts
// c_i, c_{i+1} estimate N_i r^i / N_{i+1} r^{i+1} scaled identically, so
// r <- r * c_i / c_{i+1} re-centers the tilt at the next ratio and
// log N <- log N + log r folds it into the running count.
inline LadderRunOutcome run_ladder(const UndirectedGraph& g, int t, std::uint64_t samples,
                                   std::uint64_t seed, std::uint64_t run_index,
                                   unsigned threads, PoppingStats& stats) {
  const int m = g.edge_count();
  LadderRunOutcome out;
  double ratio = static_cast<double>(m - count_bridges(g));
  double log_count = std::log(ratio);  // N_{m-1}
  const double low_guard = 1.0 / (2.0 * m);
  const double high_guard = 2.0 * m;

  for (int level = m - 2; level >= t; --level) {
    if (!(ratio >= low_guard) || !(ratio <= high_guard)) {
      out.failure = {level, ratio,
                     "running ratio left the plausible window [1/(2m), 2m]; adjacent size "
                     "counts of connected subgraphs cannot be this lopsided"};
      return out;
    }
    const double fail_prob = 1.0 / (1.0 + ratio);
    std::vector<Edge> edges = g.edges();
    for (Edge& e : edges) e.fail_prob = fail_prob;
    UndirectedGraph tilted(g.vertex_count(), std::move(edges));
    DirectedMultigraph lifted = bidirect(tilted, 0);

    const unsigned workers = worker_count(samples, threads);
    std::vector<std::uint64_t> low_hits(workers, 0), high_hits(workers, 0);
    std::vector<PoppingStats> worker_stats(workers);
    const std::uint64_t level_key = chain64(run_index, static_cast<std::uint64_t>(m - 2 - level));

    parallel_for(samples, threads, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
      ClusterPopper popper(lifted);
      PsiSizeScratch psi_size(lifted);
      std::vector<char> present;
      for (std::uint64_t j = begin; j < end; ++j) {
        Rng rng(seed, chain64(level_key, j));
        popper.sample(rng, present, worker_stats[w]);
        int size = psi_size.image_size(present, 0);
        if (size == level) ++low_hits[w];
        else if (size == level + 1) ++high_hits[w];
      }
    });

    std::uint64_t c_low = 0, c_high = 0;
    for (unsigned w = 0; w < workers; ++w) {
      c_low += low_hits[w];
      c_high += high_hits[w];
      stats.merge(worker_stats[w]);
    }
    if (c_low == 0 || c_high == 0) {
      out.failure = {level, ratio,
                     c_low == 0 ? "no draw hit the target size; the level budget is too small "
                                  "for this instance"
                                : "no draw hit the anchor size; the level budget is too small "
                                  "for this instance"};
      return out;
    }
    ratio *= static_cast<double>(c_low) / static_cast<double>(c_high);
    log_count += std::log(ratio);
    out.levels.push_back({level, c_low, c_high, samples, ratio});
  }
  out.log_count = log_count;
  return out;
}

}  // namespace detail

// Approximate count of connected subgraphs with exactly t edges.  Exact
// closed forms cover t = m (the graph itself), t = m-1 (non-bridge edges) and
// t = n-1 (spanning trees); everything else descends the sampling ladder,
// amplified by taking the lower median of ceil(8 ln(1/delta)) runs.  A run
// that fails contributes a zero; if the median lands on a failure the whole
// estimate fails rather than silently returning zero.
inline FixedSizeResult estimate_fixed_size(const UndirectedGraph& g, int t, double eps,
                                           double delta, std::uint64_t seed,
                                           FixedSizeOptions opts = {}) {
  detail::check_eps_delta(eps, delta);
  if (!is_connected(g))
    throw std::invalid_argument("graph is not connected: no edge subset spans it");
  const int n = g.vertex_count();
  const int m = g.edge_count();
  if (t < n - 1 || t > m)
    throw std::invalid_argument("subgraph size must lie between n-1 and m");

  FixedSizeResult result;
  result.report.epsilon = eps;
  result.report.delta = delta;

  auto exact_result = [&](double count, const char* how) {
    result.exact = true;
    result.report.estimate = count;
    result.report.log_estimate = count > 0 ? std::log(count) : kNegInf;
    result.report.wall_notes = how;
    return result;
  };
  if (t == m) return exact_result(1.0, "exact: only the full edge set has every edge");
  if (t == m - 1)
    return exact_result(m - count_bridges(g),
                        "exact: connected one-short subsets drop exactly one non-bridge edge");
  if (t == n - 1) {
    BigInt trees = count_spanning_trees(g);
    result.exact = true;
    result.report.estimate = trees.convert_to<double>();
    result.report.log_estimate = log_bigint(trees);
    result.report.wall_notes = "exact: minimum connected subgraphs are the spanning trees";
    return result;
  }

  const std::uint64_t samples =
      opts.samples_per_level ? opts.samples_per_level : ladder_sample_count(m, t, eps);
  const std::uint64_t runs = amplification_runs(delta);
  result.report.per_step_samples = samples;
  result.report.wall_notes =
      "ratio ladder from the one-short count down to the target size; lower median of "
      "ceil(8 ln(1/delta)) runs; failed runs count as zero";

  PoppingStats stats;
  std::vector<detail::LadderRunOutcome> outcomes;
  std::vector<double> log_values(runs);
  outcomes.reserve(runs);
  for (std::uint64_t k = 0; k < runs; ++k) {
    outcomes.push_back(detail::run_ladder(g, t, samples, seed, k, opts.threads, stats));
    log_values[k] = outcomes.back().log_count.value_or(kNegInf);
  }

  size_t pick = detail::lower_median_index(log_values);
  result.report.total_popped = stats.popped_clusters;
  if (!outcomes[pick].log_count) {
    std::uint64_t failed = 0;
    for (const auto& o : outcomes)
      if (!o.log_count) ++failed;
    const LadderFailureInfo& info = outcomes[pick].failure;
    throw LadderFailure("ladder failed in " + std::to_string(failed) + " of " +
                            std::to_string(runs) + " runs at level " +
                            std::to_string(info.level) + ": " + info.reason,
                        info);
  }
  result.report.log_estimate = *outcomes[pick].log_count;
  result.report.estimate = std::exp(result.report.log_estimate);
  for (const auto& lv : outcomes[pick].levels) result.report.per_step_means.push_back(lv.ratio);
  result.levels = outcomes[pick].levels;
  return result;
}

}  // namespace relipop
