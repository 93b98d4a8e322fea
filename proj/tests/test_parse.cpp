#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace relipop;

TEST_CASE("parse undirected graph") {
  auto parsed = parse_graph(
      "# triangle\n"
      "undirected 3 3\n"
      "e 0 1 0.2\n"
      "e 1 2 0.5   # middle edge\n"
      "e 0 2 0.7\n");
  REQUIRE(std::holds_alternative<UndirectedGraph>(parsed));
  const auto& g = std::get<UndirectedGraph>(parsed);
  REQUIRE(g.vertex_count() == 3);
  REQUIRE(g.edge_count() == 3);
  REQUIRE(g.edge(1).u == 1);
  REQUIRE(g.edge(1).v == 2);
  REQUIRE(g.edge(1).fail_prob == 0.5);
}

TEST_CASE("parse digraph with root and twin detection") {
  auto parsed = parse_graph(
      "digraph 2 2 root=0\n"
      "a 0 1 0.5\n"
      "a 1 0 0.5\n");
  const auto& g = std::get<DirectedMultigraph>(parsed);
  REQUIRE(g.root() == 0);
  REQUIRE(g.has_twins());
  REQUIRE(g.twin(0) == 1);
}

TEST_CASE("asymmetric digraph parses without twins") {
  auto parsed = parse_graph(
      "digraph 3 2 root=0\n"
      "a 1 0 0.9\n"
      "a 2 1 0.9\n");
  const auto& g = std::get<DirectedMultigraph>(parsed);
  REQUIRE_FALSE(g.has_twins());
  REQUIRE(g.arc_count() == 2);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_graph("undirected 3 1\ne 0 5 0.5\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    REQUIRE(e.line == 2);
    REQUIRE(e.column == 5);
    REQUIRE(std::string(e.what()).find("vertex id 5") != std::string::npos);
  }
}

TEST_CASE("boundary probabilities are rejected unless allowed") {
  std::string text = "undirected 2 1\ne 0 1 1\n";
  REQUIRE_THROWS_AS(parse_graph(text), ParseError);
  try {
    parse_graph(text);
  } catch (const ParseError& e) {
    REQUIRE(e.line == 2);
    REQUIRE(e.column == 7);
  }
  ParseOptions opts;
  opts.allow_boundary = true;
  REQUIRE_NOTHROW(parse_graph(text, opts));
  REQUIRE_THROWS_AS(parse_graph("undirected 2 1\ne 0 1 1.5\n", opts), ParseError);
}

TEST_CASE("malformed headers and records") {
  REQUIRE_THROWS_AS(parse_graph(""), ParseError);
  REQUIRE_THROWS_AS(parse_graph("mixed 2 1\n"), ParseError);
  REQUIRE_THROWS_AS(parse_graph("digraph 2 1\na 0 1 0.5\n"), ParseError);  // missing root=
  REQUIRE_THROWS_AS(parse_graph("digraph 2 1 root=5\na 0 1 0.5\n"), ParseError);
  REQUIRE_THROWS_AS(parse_graph("undirected 2 2\ne 0 1 0.5\n"), ParseError);  // truncated
  REQUIRE_THROWS_AS(parse_graph("undirected 2 1\nx 0 1 0.5\n"), ParseError);  // bad tag
  REQUIRE_THROWS_AS(parse_graph("undirected 2 1\ne 0 1 0.5\ne 1 0 0.5\n"), ParseError);
  REQUIRE_THROWS_AS(parse_graph("undirected 2 1\ne 0 0 0.5\n"), ParseError);  // self-loop
  REQUIRE_THROWS_AS(parse_graph("undirected 2 1\ne 0 1 zebra\n"), ParseError);
}

TEST_CASE("parallel edges are kept as a multigraph") {
  auto parsed = parse_graph(
      "undirected 2 2\n"
      "e 0 1 0.5\n"
      "e 0 1 0.3\n");
  const auto& g = std::get<UndirectedGraph>(parsed);
  REQUIRE(g.edge_count() == 2);
  REQUIRE(g.edge(0).fail_prob == 0.5);
  REQUIRE(g.edge(1).fail_prob == 0.3);
}

TEST_CASE("comments and flexible whitespace are tolerated") {
  auto parsed = parse_graph(
      "  # leading comment\n"
      "\tundirected   2 1 # header comment\n"
      "\n"
      "  e 0 1 0.25#tight comment\n");
  const auto& g = std::get<UndirectedGraph>(parsed);
  REQUIRE(g.edge_count() == 1);
  REQUIRE(g.edge(0).fail_prob == 0.25);
}
