#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "relipop/graph.hpp"
#include "relipop/matrix_tree.hpp"
#include "relipop/popping.hpp"
#include "relipop/util.hpp"

namespace relipop {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContractionStep {
  DirectedMultigraph before;
  DirectedMultigraph after;
  int u = -1, v = -1;             // contracted pair in `before`
  std::vector<int> removed_arcs;  // `before` arc ids between u and v
  std::vector<int> arc_map;       // before id -> after id, -1 for removed
  std::vector<int> arc_unmap;     // after id -> before id
};

// Chain of single-pair contractions ending at one vertex.  Each step merges
// the lexicographically smallest adjacent pair of the current graph.
struct ContractionSequence {
  std::vector<ContractionStep> steps;
};

inline ContractionSequence build_contraction_sequence(const DirectedMultigraph& g) {
  ContractionSequence seq;
  DirectedMultigraph cur = g;
  while (cur.vertex_count() > 1) {
    int bu = -1, bv = -1;
    for (const Arc& a : cur.arcs()) {
      int u = std::min(a.tail, a.head);
      int v = std::max(a.tail, a.head);
      if (bu < 0 || u < bu || (u == bu && v < bv)) {
        bu = u;
        bv = v;
      }
    }
    if (bu < 0)
      throw std::invalid_argument("graph has an isolated part; cannot contract to one vertex");
    ContractPairResult res = contract_pair(cur, bu, bv);
    ContractionStep step{cur,
                         std::move(res.graph),
                         bu,
                         bv,
                         std::move(res.removed_arcs),
                         std::move(res.arc_map),
                         {}};
    step.arc_unmap.assign(step.after.arc_count(), -1);
    for (int a = 0; a < step.before.arc_count(); ++a)
      if (step.arc_map[a] >= 0) step.arc_unmap[step.arc_map[a]] = a;
    cur = step.after;
    seq.steps.push_back(std::move(step));
  }
  return seq;
}

struct EstimateReport {
  double estimate = 0.0;
  double log_estimate = kNegInf;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t per_step_samples = 0;
  std::vector<double> per_step_means;
  std::uint64_t total_popped = 0;
  std::string wall_notes;
};

// Per-step sample budget: ceil(5 (1-p_max)^-2 (n-1) eps^-2), with p_max and n
// taken from the original input graph.
inline std::uint64_t reach_sample_count(int n, double max_fail_prob, double eps) {
  double q = 1.0 - max_fail_prob;
  return ceil_to_u64(5.0 / (q * q) * (n - 1) / (eps * eps));
}

// Median amplification width: ceil(8 ln(1/delta)) independent repetitions.
inline std::uint64_t amplification_runs(double delta) {
  std::uint64_t k = ceil_to_u64(8.0 * std::log(1.0 / delta));
  return k == 0 ? 1 : k;
}

namespace detail {
inline void check_eps_delta(double eps, double delta) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

// Index of the lower median among K log-values; ties broken by run index so
// the choice is deterministic.
inline size_t lower_median_index(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  return order[(values.size() - 1) / 2];
}
}  // namespace detail

// Mean of the lifting indicator for one contraction step: sample the
// contracted graph's conditioned measure, re-randomize the arcs the
// contraction removed, and test root-connectedness in the pre-contraction
// graph.  Each sample j draws from its own stream chain(stream_base, j), so
// the result is byte-for-byte independent of the thread count.
inline double estimate_ratio(const ContractionStep& step, std::uint64_t samples,
                             std::uint64_t seed, std::uint64_t stream_base, unsigned threads,
                             PoppingStats* stats_out = nullptr) {
  if (samples == 0) throw std::invalid_argument("estimate_ratio needs at least one sample");
  const DirectedMultigraph& big = step.before;
  const DirectedMultigraph& small = step.after;
  const int small_m = small.arc_count();
  const int big_m = big.arc_count();

  std::vector<char> hit(samples, 0);
  const unsigned workers = worker_count(samples, threads);
  std::vector<PoppingStats> worker_stats(workers);

  parallel_for(samples, threads, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
    ClusterPopper popper(small);
    ReachChecker checker(big);
    std::vector<char> small_present, big_present(big_m);
    for (std::uint64_t j = begin; j < end; ++j) {
      Rng rng(seed, chain64(stream_base, j));
      popper.sample(rng, small_present, worker_stats[w]);
      std::fill(big_present.begin(), big_present.end(), 0);
      for (int a = 0; a < small_m; ++a)
        if (small_present[a]) big_present[step.arc_unmap[a]] = 1;
      for (int r : step.removed_arcs)
        big_present[r] = rng.u01() < 1.0 - big.arc(r).fail_prob;
      hit[j] = checker.root_connected(big_present);
    }
  });

  std::uint64_t hits = 0;
  for (char h : hit) hits += h;
  if (stats_out)
    for (const PoppingStats& s : worker_stats) stats_out->merge(s);
  return static_cast<double>(hits) / static_cast<double>(samples);
}

// Probability that a subset drawn from the unconditioned product measure is
// root-connected, as a telescoping product over the contraction sequence.
// Each single-shot estimate multiplies per-step means; the returned estimate
// is the lower median of ceil(8 ln(1/delta)) independent single shots.
inline EstimateReport estimate_reach(const DirectedMultigraph& g, double eps, double delta,
                                     std::uint64_t seed, unsigned threads = 1) {
  detail::check_eps_delta(eps, delta);

  EstimateReport report;
  report.epsilon = eps;
  report.delta = delta;
  report.wall_notes =
      "lower median of ceil(8 ln(1/delta)) single-shot telescoping products; "
      "per-step budget ceil(5 (1-p_max)^-2 (n-1) eps^-2)";
  if (g.vertex_count() == 1) {  // trivially root-connected, twins or not
    report.estimate = 1.0;
    report.log_estimate = 0.0;
    return report;
  }
  if (!g.has_twins())
    throw std::invalid_argument("estimate_reach requires a bi-directed graph (twin pairing)");
  {
    ClusterPopper check(g);  // validates root-connectedness up front
  }

  ContractionSequence seq = build_contraction_sequence(g);
  const std::uint64_t s = reach_sample_count(g.vertex_count(), g.max_fail_prob(), eps);
  const std::uint64_t runs = amplification_runs(delta);
  report.per_step_samples = s;

  std::vector<double> log_values(runs, 0.0);
  std::vector<std::vector<double>> run_means(runs);
  PoppingStats stats;
  for (std::uint64_t k = 0; k < runs; ++k) {
    run_means[k].reserve(seq.steps.size());
    double log_product = 0.0;
    for (size_t i = 0; i < seq.steps.size(); ++i) {
      double mean =
          estimate_ratio(seq.steps[i], s, seed, chain64(k, i), threads, &stats);
      if (mean == 0.0)
        throw EstimationError("contraction step " + std::to_string(i) + " of run " +
                              std::to_string(k) +
                              " produced no root-connected lift; the estimate would be zero");
      run_means[k].push_back(mean);
      log_product += std::log(mean);
    }
    log_values[k] = log_product;
  }

  size_t pick = detail::lower_median_index(log_values);
  report.log_estimate = log_values[pick];
  report.estimate = std::exp(report.log_estimate);
  report.per_step_means = run_means[pick];
  report.total_popped = stats.popped_clusters;
  return report;
}

// All-terminal unreliability: probability that independent edge failures
// leave the graph connected, computed on the bi-directed version rooted at 0.
inline EstimateReport estimate_reliability(const UndirectedGraph& g, double eps, double delta,
                                           std::uint64_t seed, unsigned threads = 1) {
  if (!is_connected(g))
    throw std::invalid_argument("graph is not connected: no edge subset spans it");
  EstimateReport report = estimate_reach(bidirect(g, 0), eps, delta, seed, threads);
  report.wall_notes +=
      "; undirected input lifted through bidirect, m counted as arcs of the bi-directed graph";
  return report;
}

// Above this uniform failure probability the plug-in estimator takes over:
// p* = 1 - 1/(3m) with m the arc count.
inline double highp_threshold(int arc_count) {
  if (arc_count <= 0) throw std::invalid_argument("high-p threshold needs at least one arc");
  return 1.0 - 1.0 / (3.0 * arc_count);
}

struct HighpDraw {
  IndexSet subset;
  PoppingStats stats;
  std::uint64_t attempts = 0;
};

namespace detail {
inline void check_uniform_highp(const DirectedMultigraph& g, double p) {
  double gp = 0.0;
  if (!g.uniform_fail_prob(&gp) || gp != p)
    throw std::invalid_argument("high-p sampling requires every arc to carry the stated uniform probability");
  if (!(p < 1.0)) throw std::invalid_argument("uniform failure probability must be below 1");
  if (!(p > highp_threshold(g.arc_count())))
    throw std::invalid_argument("uniform failure probability does not exceed the high-p threshold 1 - 1/(3m)");
}

inline DirectedMultigraph with_uniform_prob(const DirectedMultigraph& g, double p) {
  std::vector<Arc> arcs = g.arcs();
  for (Arc& a : arcs) a.fail_prob = p;
  return DirectedMultigraph(g.vertex_count(), g.root(), std::move(arcs),
                            std::vector<int>(g.twin_map()));
}
}  // namespace detail

// Rejection sampler for the conditioned measure at uniform p above the
// threshold: run the popping sampler at the threshold probability p* and keep
// a drawn subset S with probability ((p*(1-p)) / (p(1-p*)))^(|S|-n+1), which
// tilts the measure from p* back to p.  The acceptance chance is at least
// 1/2, so a couple of attempts per draw suffice on average.
inline HighpDraw highp_sample(const DirectedMultigraph& g, double p, std::uint64_t seed,
                              std::uint64_t stream = 0) {
  detail::check_uniform_highp(g, p);
  const double pstar = highp_threshold(g.arc_count());
  DirectedMultigraph tilted = detail::with_uniform_prob(g, pstar);
  ClusterPopper popper(tilted);
  Rng rng(seed, stream);
  const double log_keep_per_extra =
      std::log(pstar) + std::log1p(-p) - std::log(p) - std::log1p(-pstar);
  const int base_size = g.vertex_count() - 1;

  HighpDraw draw;
  std::vector<char> present;
  for (;;) {
    ++draw.attempts;
    popper.sample(rng, present, draw.stats);
    int size = 0;
    for (char c : present) size += c;
    double keep = std::exp((size - base_size) * log_keep_per_extra);
    if (rng.u01() < keep) {
      draw.subset = IndexSet::from_flags(present);
      return draw;
    }
  }
}

// Plug-in estimator for the high-p regime: the minimum root-connected
// subsets are the arborescences, counted exactly; their share of the
// conditioned measure is estimated empirically, and
//   Z = (#arborescences) (1-p)^(n-1) p^(m-n+1) / Pr[|S| = n-1].
// One pass of N = ceil(12 eps^-2 ln(4/delta)) draws; no median needed.
inline EstimateReport highp_estimate(const DirectedMultigraph& g, double p, double eps,
                                     double delta, std::uint64_t seed, unsigned threads = 1) {
  detail::check_eps_delta(eps, delta);
  detail::check_uniform_highp(g, p);
  const int n = g.vertex_count();
  const int m = g.arc_count();
  BigInt arbs = count_arborescences(g);

  const std::uint64_t draws = ceil_to_u64(12.0 / (eps * eps) * std::log(4.0 / delta));
  std::vector<char> hit(draws, 0);
  const unsigned workers = worker_count(draws, threads);
  std::vector<PoppingStats> worker_stats(workers);
  std::vector<std::uint64_t> worker_attempts(workers, 0);

  parallel_for(draws, threads, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t j = begin; j < end; ++j) {
      HighpDraw draw = highp_sample(g, p, seed, chain64(0x48504d50u, j));
      worker_stats[w].merge(draw.stats);
      worker_attempts[w] += draw.attempts;
      hit[j] = draw.subset.size() == n - 1;
    }
  });

  std::uint64_t hits = 0;
  for (char h : hit) hits += h;
  if (hits == 0)
    throw EstimationError("no draw hit the minimum subset size; cannot normalize the plug-in estimate");

  EstimateReport report;
  report.epsilon = eps;
  report.delta = delta;
  report.per_step_samples = draws;
  double q_hat = static_cast<double>(hits) / static_cast<double>(draws);
  report.per_step_means = {q_hat};
  report.log_estimate = log_bigint(arbs) + (n - 1) * std::log1p(-p) +
                        (m - n + 1) * std::log(p) - std::log(q_hat);
  report.estimate = std::exp(report.log_estimate);
  for (const PoppingStats& s : worker_stats) report.total_popped += s.popped_clusters;
  report.wall_notes =
      "plug-in estimate: exact arborescence count at minimum size, empirical share of "
      "minimum-size draws from the tilted rejection sampler";
  return report;
}

}  // namespace relipop
