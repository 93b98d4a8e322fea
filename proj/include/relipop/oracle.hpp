#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "relipop/graph.hpp"
#include "relipop/scc.hpp"
#include "relipop/util.hpp"

namespace relipop {

// Brute-force enumeration over all 2^m subsets.  Everything statistical in
// the library is validated against these numbers on small instances.
struct EnumerationResult {
  // k -> log of the total weight of subsets with exactly k bad components
  // (minimal clusters for the rooted case, components-1 for the undirected
  // case).  Key 0 is the log normalizing constant of the conditioned measure.
  std::map<int, double> log_z_by_bad_count;
  // Probability of each good subset under the conditioned measure, keyed by
  // the subset bitmask (bit i = arc/edge i present).
  std::map<std::uint32_t, double> distribution;
  // Good subsets grouped by cardinality (counts, not weights).
  std::map<int, std::uint64_t> counts_by_size;
  double log_z0 = kNegInf;

  double log_z(int k) const {
    auto it = log_z_by_bad_count.find(k);
    return it == log_z_by_bad_count.end() ? kNegInf : it->second;
  }
  // Expected clusters popped by the sampler equals Z1/Z0.
  double expected_popped() const { return std::exp(log_z(1) - log_z0); }
};

inline constexpr int kEnumerationCap = 24;

namespace detail {

// Running log-weight that tolerates boundary probabilities: -inf factors are
// counted instead of added so they cancel exactly when toggled back out.
struct ToggleWeight {
  double finite = 0.0;
  int zero_factors = 0;
  void add(double log_term) {
    if (log_term == kNegInf) ++zero_factors;
    else finite += log_term;
  }
  void remove(double log_term) {
    if (log_term == kNegInf) --zero_factors;
    else finite -= log_term;
  }
  double value() const { return zero_factors > 0 ? kNegInf : finite; }
};

inline void check_enumerable(int m) {
  if (m > kEnumerationCap)
    throw std::invalid_argument("instance has " + std::to_string(m) + " arcs/edges; enumeration is capped at " +
                                std::to_string(kEnumerationCap));
}

}  // namespace detail

// Exhaustive reference for rooted instances: partitions the product measure
// by the number of minimal clusters and normalizes the root-connected part.
// Subsets are visited in Gray-code order so each step toggles one arc and
// updates the running weight in O(1).
inline EnumerationResult enumerate_reach(const DirectedMultigraph& g,
                                         bool want_distribution = true) {
  const int m = g.arc_count();
  detail::check_enumerable(m);
  const int n = g.vertex_count();

  std::vector<double> log_p(m), log_q(m);
  detail::ToggleWeight weight;
  for (int a = 0; a < m; ++a) {
    log_p[a] = std::log(g.arc(a).fail_prob);
    log_q[a] = std::log1p(-g.arc(a).fail_prob);
    weight.add(log_p[a]);  // start from the empty subset
  }

  std::vector<char> present(m, 0);
  SccScratch scc;
  std::vector<char> comp_is_sink;
  std::vector<LogSum> by_count(n + 1);
  std::map<std::uint32_t, double> good_log_weight;
  EnumerationResult result;

  auto visit = [&](std::uint32_t mask) {
    scc.compute(g, present);
    comp_is_sink.assign(scc.comp_count, 1);
    comp_is_sink[scc.comp[g.root()]] = 0;
    for (int a = 0; a < m; ++a) {
      if (!present[a]) continue;
      int ct = scc.comp[g.arc(a).tail];
      if (ct != scc.comp[g.arc(a).head]) comp_is_sink[ct] = 0;
    }
    int bad = 0;
    for (char c : comp_is_sink) bad += c;
    double w = weight.value();
    by_count[bad].add(w);
    if (bad == 0) {
      result.counts_by_size[std::popcount(mask)]++;
      if (want_distribution) good_log_weight[mask] = w;
    }
  };

  visit(0);
  const std::uint32_t total = std::uint32_t{1} << m;
  for (std::uint32_t i = 1; i < total; ++i) {
    int bit = std::countr_zero(i);
    if (present[bit]) {
      present[bit] = 0;
      weight.remove(log_q[bit]);
      weight.add(log_p[bit]);
    } else {
      present[bit] = 1;
      weight.remove(log_p[bit]);
      weight.add(log_q[bit]);
    }
    visit(i ^ (i >> 1));
  }

  int max_bad = 0;
  for (int k = 0; k <= n; ++k)
    if (by_count[k].value() != kNegInf) max_bad = k;
  for (int k = 0; k <= max_bad; ++k) result.log_z_by_bad_count[k] = by_count[k].value();
  result.log_z0 = by_count[0].value();
  if (want_distribution && result.log_z0 != kNegInf)
    for (auto [mask, lw] : good_log_weight)
      result.distribution[mask] = std::exp(lw - result.log_z0);
  return result;
}

// Exhaustive reference for undirected instances: same layout with
// "components - 1" as the badness count and connectedness as the good event.
inline EnumerationResult enumerate_rel(const UndirectedGraph& g, bool want_distribution = true) {
  const int m = g.edge_count();
  detail::check_enumerable(m);
  const int n = g.vertex_count();

  std::vector<double> log_p(m), log_q(m);
  detail::ToggleWeight weight;
  for (int e = 0; e < m; ++e) {
    log_p[e] = std::log(g.edge(e).fail_prob);
    log_q[e] = std::log1p(-g.edge(e).fail_prob);
    weight.add(log_p[e]);
  }

  std::vector<char> present(m, 0);
  std::vector<int> parent(n);
  std::vector<LogSum> by_count(n + 1);
  std::map<std::uint32_t, double> good_log_weight;
  EnumerationResult result;

  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  auto visit = [&](std::uint32_t mask) {
    for (int v = 0; v < n; ++v) parent[v] = v;
    int components = n;
    for (int e = 0; e < m; ++e) {
      if (!present[e]) continue;
      int a = find(g.edge(e).u), b = find(g.edge(e).v);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    int bad = components - 1;
    double w = weight.value();
    by_count[bad].add(w);
    if (bad == 0) {
      result.counts_by_size[std::popcount(mask)]++;
      if (want_distribution) good_log_weight[mask] = w;
    }
  };

  visit(0);
  const std::uint32_t total = std::uint32_t{1} << m;
  for (std::uint32_t i = 1; i < total; ++i) {
    int bit = std::countr_zero(i);
    if (present[bit]) {
      present[bit] = 0;
      weight.remove(log_q[bit]);
      weight.add(log_p[bit]);
    } else {
      present[bit] = 1;
      weight.remove(log_p[bit]);
      weight.add(log_q[bit]);
    }
    visit(i ^ (i >> 1));
  }

  int max_bad = 0;
  for (int k = 0; k <= n; ++k)
    if (by_count[k].value() != kNegInf) max_bad = k;
  for (int k = 0; k <= max_bad; ++k) result.log_z_by_bad_count[k] = by_count[k].value();
  result.log_z0 = by_count[0].value();
  if (want_distribution && result.log_z0 != kNegInf)
    for (auto [mask, lw] : good_log_weight)
      result.distribution[mask] = std::exp(lw - result.log_z0);
  return result;
}

// Total variation distance between two distributions keyed by subset mask.
inline double tv_distance(const std::map<std::uint32_t, double>& p,
                          const std::map<std::uint32_t, double>& q) {
  double sum = 0.0;
  auto ip = p.begin();
  auto iq = q.begin();
  while (ip != p.end() || iq != q.end()) {
    if (iq == q.end() || (ip != p.end() && ip->first < iq->first)) {
      sum += std::abs(ip->second);
      ++ip;
    } else if (ip == p.end() || iq->first < ip->first) {
      sum += std::abs(iq->second);
      ++iq;
    } else {
      sum += std::abs(ip->second - iq->second);
      ++ip;
      ++iq;
    }
  }
  return 0.5 * sum;
}

}  // namespace relipop
