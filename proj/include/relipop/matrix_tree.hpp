#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "relipop/graph.hpp"
#include "relipop/util.hpp"

namespace relipop {

using BigInt = boost::multiprecision::cpp_int;

// Fraction-free Gaussian elimination (Bareiss).  Exact over integers; every
// intermediate division is known to be exact.  Consumes its argument.
inline BigInt bareiss_determinant(std::vector<std::vector<BigInt>> a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return 1;
  int sign = 1;
  BigInt prev = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      int pivot = -1;
      for (int r = k + 1; r < n; ++r)
        if (a[r][k] != 0) {
          pivot = r;
          break;
        }
      if (pivot < 0) return 0;
      std::swap(a[k], a[pivot]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  BigInt det = a[n - 1][n - 1];
  return sign < 0 ? BigInt(-det) : det;
}

// Number of spanning arborescences oriented toward the root: determinant of
// the out-degree Laplacian with the root's row and column removed.  Parallel
// arcs count with multiplicity.
inline BigInt count_arborescences(const DirectedMultigraph& g) {
  const int n = g.vertex_count();
  const int r = g.root();
  if (n == 1) return 1;
  auto idx = [&](int v) { return v < r ? v : v - 1; };
  std::vector<std::vector<BigInt>> lap(n - 1, std::vector<BigInt>(n - 1, 0));
  for (const Arc& a : g.arcs()) {
    if (a.tail == r) continue;  // root row and column are dropped
    lap[idx(a.tail)][idx(a.tail)] += 1;
    if (a.head != r) lap[idx(a.tail)][idx(a.head)] -= 1;
  }
  return bareiss_determinant(std::move(lap));
}

// Kirchhoff count of spanning trees (vertex 0's row/column removed).
inline BigInt count_spanning_trees(const UndirectedGraph& g) {
  const int n = g.vertex_count();
  if (n == 1) return 1;
  std::vector<std::vector<BigInt>> lap(n - 1, std::vector<BigInt>(n - 1, 0));
  for (const Edge& e : g.edges()) {
    if (e.u != 0) lap[e.u - 1][e.u - 1] += 1;
    if (e.v != 0) lap[e.v - 1][e.v - 1] += 1;
    if (e.u != 0 && e.v != 0) {
      lap[e.u - 1][e.v - 1] -= 1;
      lap[e.v - 1][e.u - 1] -= 1;
    }
  }
  return bareiss_determinant(std::move(lap));
}

// Natural log of a non-negative big integer; log(0) = -inf.  Splits off the
// high bits so counts far beyond double range still get a finite log.
inline double log_bigint(const BigInt& x) {
  if (x < 0) throw std::invalid_argument("log_bigint: negative argument");
  if (x == 0) return kNegInf;
  const unsigned bits = boost::multiprecision::msb(x) + 1;
  if (bits <= 960) return std::log(x.convert_to<double>());
  const unsigned shift = bits - 512;
  BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + shift * 0.6931471805599453;
}

}  // namespace relipop
