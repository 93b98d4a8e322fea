#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace relipop;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double total_weight(const EnumerationResult& r) {
  LogSum all;
  for (auto [k, lz] : r.log_z_by_bad_count) all.add(lz);
  return std::exp(all.value());
}

std::uint64_t good_count(const EnumerationResult& r) {
  std::uint64_t total = 0;
  for (auto [size, c] : r.counts_by_size) total += c;
  return total;
}

}  // namespace

TEST_CASE("rooted enumeration of a single bidirected pair") {
  UndirectedGraph pair1(2, {{0, 1, 0.5}});
  auto r = enumerate_reach(bidirect(pair1, 0));
  // Root-connected iff the arc 1->0 (id 1) is present: probability 1/2.
  REQUIRE_THAT(std::exp(r.log_z0), WithinAbs(0.5, 1e-14));
  REQUIRE_THAT(r.expected_popped(), WithinAbs(1.0, 1e-14));
  REQUIRE(r.counts_by_size == std::map<int, std::uint64_t>{{1, 1}, {2, 1}});
  REQUIRE_THAT(r.distribution.at(0b10), WithinAbs(0.5, 1e-14));
  REQUIRE_THAT(r.distribution.at(0b11), WithinAbs(0.5, 1e-14));
}

TEST_CASE("rooted enumeration frozen values") {
  struct Row {
    const char* name;
    DirectedMultigraph g;
    double z0;
    double popped;
    std::uint64_t good;
  };
  UndirectedGraph k3mix(3, {{0, 1, 0.2}, {1, 2, 0.5}, {0, 2, 0.7}});
  UndirectedGraph path3(3, {{0, 1, 0.4}, {1, 2, 0.4}});
  std::vector<Row> rows;
  rows.push_back({"K3", bidirect(testsup::complete_graph(3, 0.5), 0), 0.5, 0.875, 32});
  rows.push_back({"K3mix", bidirect(k3mix, 0), 0.55, 0.75454545454545454, 32});
  rows.push_back({"path3", bidirect(path3, 0), 0.36, 1.6, 4});
  rows.push_back({"C4", bidirect(testsup::cycle_graph(4, 0.5), 0), 0.3125, 1.6, 80});
  rows.push_back(
      {"K4", bidirect(testsup::complete_graph(4, 0.5), 0), 0.59375, 0.60197368421052632, 2432});
  rows.push_back({"K4p7", bidirect(testsup::complete_graph(4, 0.7), 0), 0.21864599999999989,
                  2.2267892072116693, 2432});
  rows.push_back({"multi-pair", bidirect(testsup::multi_pair({0.5, 0.3}), 0), 0.85,
                  3.0 / 17.0, 12});
  for (auto& row : rows) {
    INFO(row.name);
    auto r = enumerate_reach(row.g);
    REQUIRE_THAT(std::exp(r.log_z0), WithinRel(row.z0, 1e-12));
    REQUIRE_THAT(r.expected_popped(), WithinRel(row.popped, 1e-12));
    REQUIRE(good_count(r) == row.good);
    REQUIRE(r.distribution.size() == row.good);
    // The Z_k partition the full product measure.
    REQUIRE_THAT(total_weight(r), WithinAbs(1.0, 1e-12));
    // Conditioned distribution sums to one.
    double sum = 0.0;
    for (auto [mask, prob] : r.distribution) sum += prob;
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("rooted enumeration size profile of the bidirected triangle") {
  auto r = enumerate_reach(bidirect(testsup::complete_graph(3, 0.5), 0));
  std::map<int, std::uint64_t> expect{{2, 3}, {3, 10}, {4, 12}, {5, 6}, {6, 1}};
  REQUIRE(r.counts_by_size == expect);
  // Smallest root-connected subsets are the 3 arborescences; the full subset
  // has conditional probability (1/2)^6 / Z0 = 1/32.
  REQUIRE_THAT(r.distribution.at((1u << 6) - 1), WithinAbs(1.0 / 32.0, 1e-13));
}

TEST_CASE("directed in-path has expected pops far above the bidirected bound") {
  // b->a->r with failure probability 0.9: not bi-directed, so the
  // p/(1-p)*m*n guarantee does not apply; E[T] = Z1/Z0 = 18 here.
  DirectedMultigraph intree(3, 0, {{1, 0, 0.9}, {2, 1, 0.9}});
  auto r = enumerate_reach(intree);
  REQUIRE_THAT(std::exp(r.log_z0), WithinRel(0.01, 1e-12));
  REQUIRE_THAT(r.expected_popped(), WithinRel(18.0, 1e-12));
  REQUIRE(good_count(r) == 1);
}

TEST_CASE("undirected enumeration frozen values") {
  auto k4 = enumerate_rel(testsup::complete_graph(4, 0.5));
  REQUIRE_THAT(std::exp(k4.log_z0), WithinRel(0.59375, 1e-12));
  std::map<int, std::uint64_t> expect_k4{{3, 16}, {4, 15}, {5, 6}, {6, 1}};
  REQUIRE(k4.counts_by_size == expect_k4);
  REQUIRE_THAT(total_weight(k4), WithinAbs(1.0, 1e-12));

  auto k5 = enumerate_rel(testsup::complete_graph(5, 0.5));
  std::map<int, std::uint64_t> expect_k5{{4, 125}, {5, 222}, {6, 205}, {7, 120},
                                         {8, 45},  {9, 10},  {10, 1}};
  REQUIRE(k5.counts_by_size == expect_k5);
  REQUIRE(good_count(k5) == 728);

  auto c4 = enumerate_rel(testsup::cycle_graph(4, 0.5));
  REQUIRE_THAT(std::exp(c4.log_z0), WithinRel(0.3125, 1e-12));
  std::map<int, std::uint64_t> expect_c4{{3, 4}, {4, 1}};
  REQUIRE(c4.counts_by_size == expect_c4);
}

TEST_CASE("connectedness and root-connectedness have equal partition functions") {
  // For any undirected graph, the probability that the random subgraph is
  // connected equals the probability that the bidirected version is
  // root-connected, root chosen arbitrarily.
  std::vector<UndirectedGraph> graphs{
      testsup::complete_graph(3, 0.5),
      UndirectedGraph(3, {{0, 1, 0.2}, {1, 2, 0.5}, {0, 2, 0.7}}),
      testsup::cycle_graph(4, 0.5),
      testsup::complete_graph(4, 0.35),
      testsup::multi_pair({0.5, 0.3}),
      testsup::path_graph(5, 0.6),
  };
  for (size_t i = 0; i < graphs.size(); ++i) {
    INFO("graph " << i);
    auto rel = enumerate_rel(graphs[i], false);
    for (int root = 0; root < graphs[i].vertex_count(); root += 2) {
      auto reach = enumerate_reach(bidirect(graphs[i], root), false);
      REQUIRE_THAT(reach.log_z0, WithinAbs(rel.log_z0, 1e-10));
    }
  }
}

TEST_CASE("boundary probabilities enumerate without NaNs") {
  // p=0 forces the arc present: conditioning is unaffected.
  DirectedMultigraph forced(2, 0, {{1, 0, 0.0}});
  auto r0 = enumerate_reach(forced);
  REQUIRE_THAT(r0.log_z0, WithinAbs(0.0, 1e-15));
  REQUIRE(r0.distribution.size() == 1);
  REQUIRE_THAT(r0.distribution.at(0b1), WithinAbs(1.0, 1e-15));
  REQUIRE(r0.expected_popped() == 0.0);

  // p=1 forces the arc absent: the good event has probability zero.
  DirectedMultigraph impossible(2, 0, {{1, 0, 1.0}});
  auto r1 = enumerate_reach(impossible);
  REQUIRE(r1.log_z0 == kNegInf);
  REQUIRE(r1.distribution.empty());

  // Mixed case: one forced edge, one random edge on a triangle.
  UndirectedGraph mixed(3, {{0, 1, 0.0}, {1, 2, 0.5}, {0, 2, 0.5}});
  auto rm = enumerate_rel(mixed);
  // Connected iff at least one of the two random edges is present... plus the
  // forced edge joins {0,1}; P = 1 - 0.25.
  REQUIRE_THAT(std::exp(rm.log_z0), WithinRel(0.75, 1e-12));
  double sum = 0.0;
  for (auto [mask, prob] : rm.distribution) {
    REQUIRE(std::isfinite(prob));
    // Subsets missing the forced edge carry zero conditional probability.
    if ((mask & 1u) == 0) REQUIRE(prob == 0.0);
    sum += prob;
  }
  REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
}

TEST_CASE("enumeration is capped") {
  REQUIRE_THROWS_AS(enumerate_reach(bidirect(testsup::complete_graph(6, 0.5), 0)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(enumerate_rel(testsup::complete_graph(8, 0.5)),
                    std::invalid_argument);
  // 24 is still allowed.
  REQUIRE_NOTHROW(enumerate_rel(testsup::complete_graph(7, 0.9), false));
}

TEST_CASE("tv distance basics") {
  std::map<std::uint32_t, double> a{{0, 0.5}, {1, 0.5}};
  std::map<std::uint32_t, double> b{{0, 0.25}, {2, 0.75}};
  REQUIRE_THAT(tv_distance(a, a), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(tv_distance(a, b), WithinAbs(0.5 * (0.25 + 0.5 + 0.75), 1e-15));
  REQUIRE_THAT(tv_distance(a, b), WithinAbs(tv_distance(b, a), 1e-15));
}
