#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "relipop/relipop.hpp"

namespace testsup {

inline relipop::UndirectedGraph complete_graph(int n, double p) {
  std::vector<relipop::Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.push_back({u, v, p});
  return relipop::UndirectedGraph(n, std::move(edges));
}

inline relipop::UndirectedGraph cycle_graph(int n, double p) {
  std::vector<relipop::Edge> edges;
  for (int v = 0; v < n; ++v) edges.push_back({v, (v + 1) % n, p});
  return relipop::UndirectedGraph(n, std::move(edges));
}

inline relipop::UndirectedGraph path_graph(int n, double p) {
  std::vector<relipop::Edge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, p});
  return relipop::UndirectedGraph(n, std::move(edges));
}

// Two vertices joined by one parallel edge per listed probability.
inline relipop::UndirectedGraph multi_pair(const std::vector<double>& probs) {
  std::vector<relipop::Edge> edges;
  for (double p : probs) edges.push_back({0, 1, p});
  return relipop::UndirectedGraph(2, std::move(edges));
}

// Regularized incomplete gamma functions, series + continued fraction
// (Lentz).  Q(a, x) is the chi-square tail: p-value of stat s with k degrees
// of freedom is Q(k/2, s/2).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

inline double chi_square_pvalue(double stat, int dof) {
  return gamma_q(dof / 2.0, stat / 2.0);
}

// Chi-square statistic of observed counts against expected probabilities;
// cells with expected probability 0 must stay empty.
inline double chi_square_stat(const std::map<std::uint32_t, std::uint64_t>& observed,
                              const std::map<std::uint32_t, double>& expected,
                              std::uint64_t total) {
  double stat = 0.0;
  for (auto [mask, prob] : expected) {
    auto it = observed.find(mask);
    double obs = it == observed.end() ? 0.0 : static_cast<double>(it->second);
    double exp = prob * static_cast<double>(total);
    stat += (obs - exp) * (obs - exp) / exp;
  }
  for (auto [mask, count] : observed)
    if (count > 0 && expected.find(mask) == expected.end())
      throw std::runtime_error("observed a subset with zero probability under the oracle");
  return stat;
}

inline std::map<std::uint32_t, double> to_distribution(
    const std::map<std::uint32_t, std::uint64_t>& counts, std::uint64_t total) {
  std::map<std::uint32_t, double> dist;
  for (auto [mask, c] : counts)
    dist[mask] = static_cast<double>(c) / static_cast<double>(total);
  return dist;
}

}  // namespace testsup
